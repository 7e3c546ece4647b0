#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "netblock/graph.hpp"
#include "netblock/types.hpp"

namespace netblock {

struct SampleOptions {
  /// Diagonal cells A_ii are sampled by default; disable to produce
  /// loop-free layers.
  bool self_loops = true;
};

/// L i.i.d. layers with P(A_ij = 1) = rho * B_{g_i g_j} for i <= j.
/// Layer l uses the stream seed (seed XOR l), so generation is
/// order-independent and parallel over layers.
NetworkSample sample_mono(const ConnectivityMatrix& B, const MembershipMatrix& Z,
                          double rho, int L, std::uint64_t seed,
                          const SampleOptions& opts = {});

/// Layer groups with per-group connectivity matrices; layers_per_group[g]
/// layers are drawn from Bs[g]. Group labels are attached to the sample.
NetworkSample sample_multi(const std::vector<ConnectivityMatrix>& Bs,
                           const MembershipMatrix& Z, double rho,
                           const std::vector<int>& layers_per_group,
                           std::uint64_t seed, const SampleOptions& opts = {});

/// rho * Z B Z^T as a dense matrix.
Eigen::MatrixXd expected_adjacency(const ConnectivityMatrix& B,
                                   const MembershipMatrix& Z, double rho);

/// Entrywise mean over the selected layers (all layers by default).
AveragedAdjacency average_layers(const NetworkSample& sample,
                                 const std::optional<std::vector<int>>& subset =
                                     std::nullopt);

}  // namespace netblock
