#pragma once

#include <Eigen/Dense>
#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

#include "netblock/types.hpp"

namespace netblock {

/// Upper-triangular coordinate, i <= j. Lexicographic order by (i, j).
struct Edge {
  std::uint32_t i;
  std::uint32_t j;
  auto operator<=>(const Edge&) const = default;
};

/// One symmetric binary adjacency matrix stored as a sorted upper-triangular
/// edge list (diagonal included when self-loops are present).
class BinaryLayer {
 public:
  BinaryLayer(int n, std::vector<Edge> edges);

  int n() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }

  Eigen::MatrixXd dense() const;

  /// Symmetric neighbor lists; node i appears in its own list iff (i,i) is
  /// an edge. Sorted ascending.
  std::vector<std::vector<std::uint32_t>> neighbor_lists() const;

  /// Row sums of the adjacency matrix (diagonal counted once).
  std::vector<int> degrees() const;

  bool operator==(const BinaryLayer& other) const {
    return n_ == other.n_ && edges_ == other.edges_;
  }

 private:
  int n_;
  std::vector<Edge> edges_;
};

/// L node-aligned binary layers with known sparsity factor rho and optional
/// ground-truth layer-group labels (0-based internally).
class NetworkSample {
 public:
  NetworkSample(std::vector<BinaryLayer> layers, double rho,
                std::optional<std::vector<int>> group_labels = std::nullopt);

  int n() const { return n_; }
  int L() const { return static_cast<int>(layers_.size()); }
  double rho() const { return rho_; }
  const std::vector<BinaryLayer>& layers() const { return layers_; }
  const std::optional<std::vector<int>>& group_labels() const {
    return group_labels_;
  }

  /// New sample restricted to the given layer indices (group labels dropped).
  NetworkSample subset(const std::vector<int>& layer_indices) const;

 private:
  int n_;
  double rho_;
  std::vector<BinaryLayer> layers_;
  std::optional<std::vector<int>> group_labels_;
};

/// Entrywise mean of a set of layers, stored sparsely as upper-triangular
/// coordinates with values in [0,1].
class AveragedAdjacency {
 public:
  static AveragedAdjacency average(const NetworkSample& sample,
                                   const std::optional<std::vector<int>>& subset =
                                       std::nullopt);

  /// Wraps a dense symmetric matrix with entries in [0,1] (noiseless tests,
  /// expected adjacencies).
  static AveragedAdjacency from_dense(const Eigen::MatrixXd& M, int layer_count = 1);

  int n() const { return n_; }
  int layer_count() const { return layer_count_; }
  const std::vector<Edge>& coords() const { return coords_; }
  const std::vector<double>& values() const { return values_; }

  double frob2() const;
  Eigen::MatrixXd dense() const;

  /// Z^T A Z, the K x K matrix of block sums over the full symmetric matrix.
  Eigen::MatrixXd block_sums(const MembershipMatrix& Z) const;

  /// Per-community sums of diagonal entries sum_{i in C_k} A_ii.
  Eigen::VectorXd diagonal_block_sums(const MembershipMatrix& Z) const;

 private:
  AveragedAdjacency(int n, int layer_count, std::vector<Edge> coords,
                    std::vector<double> values);

  int n_;
  int layer_count_;
  std::vector<Edge> coords_;
  std::vector<double> values_;
};

}  // namespace netblock
