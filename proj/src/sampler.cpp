#include "netblock/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "netblock/errors.hpp"
#include "netblock/parallel.hpp"
#include "netblock/rng.hpp"

namespace netblock {

namespace {

// Bernoulli(p) over one row segment of cells via geometric skipping; emits
// the hit positions through `hit`.
template <typename Fn>
void sample_segment(Rng& rng, std::uint64_t len, double p, Fn&& hit) {
  if (len == 0 || p <= 0.0) return;
  if (p >= 1.0) {
    for (std::uint64_t t = 0; t < len; ++t) hit(t);
    return;
  }
  std::uint64_t pos = rng.skip_geometric(p);
  while (pos < len) {
    hit(pos);
    pos += 1 + rng.skip_geometric(p);
  }
}

BinaryLayer sample_layer(const ConnectivityMatrix& B, const MembershipMatrix& Z,
                         double rho, std::uint64_t stream_seed, bool self_loops) {
  Rng rng(stream_seed);
  const auto& members = Z.members();
  const int K = Z.K();
  std::vector<Edge> edges;
  for (int k = 0; k < K; ++k) {
    const auto& Ck = members[k];
    const std::uint64_t nk = Ck.size();
    // Within-community cells (a <= b), optionally including the diagonal.
    {
      const double p = rho * B.entries()(k, k);
      for (std::uint64_t a = 0; a < nk; ++a) {
        const std::uint64_t b0 = self_loops ? a : a + 1;
        if (b0 >= nk) continue;
        sample_segment(rng, nk - b0, p, [&](std::uint64_t t) {
          edges.push_back({static_cast<std::uint32_t>(Ck[a]),
                           static_cast<std::uint32_t>(Ck[b0 + t])});
        });
      }
    }
    // Cross-community rectangles; communities are disjoint so every cell is
    // a distinct unordered pair.
    for (int l = k + 1; l < K; ++l) {
      const auto& Cl = members[l];
      const double p = rho * B.entries()(k, l);
      for (std::uint64_t a = 0; a < nk; ++a) {
        sample_segment(rng, Cl.size(), p, [&](std::uint64_t t) {
          const std::uint32_t u = static_cast<std::uint32_t>(Ck[a]);
          const std::uint32_t v = static_cast<std::uint32_t>(Cl[t]);
          edges.push_back({std::min(u, v), std::max(u, v)});
        });
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  return BinaryLayer(Z.n(), std::move(edges));
}

void check_inputs(const ConnectivityMatrix& B, const MembershipMatrix& Z,
                  double rho, int L) {
  if (B.K() != Z.K())
    throw DataError("sampler: connectivity is " + std::to_string(B.K()) +
                    "x" + std::to_string(B.K()) + " but membership has K=" +
                    std::to_string(Z.K()));
  if (!B.probability())
    throw DataError("sampler: connectivity matrix must hold probabilities");
  if (!(rho > 0.0 && rho <= 1.0)) throw DataError("sampler: rho must lie in (0,1]");
  if (L < 1) throw DataError("sampler: layer count must be at least 1");
}

}  // namespace

NetworkSample sample_mono(const ConnectivityMatrix& B, const MembershipMatrix& Z,
                          double rho, int L, std::uint64_t seed,
                          const SampleOptions& opts) {
  check_inputs(B, Z, rho, L);
  std::vector<BinaryLayer> layers(static_cast<std::size_t>(L),
                                  BinaryLayer(Z.n(), {}));
  parallel_for(static_cast<std::size_t>(L), [&](std::size_t l) {
    layers[l] = sample_layer(B, Z, rho, seed ^ static_cast<std::uint64_t>(l),
                             opts.self_loops);
  });
  return NetworkSample(std::move(layers), rho);
}

NetworkSample sample_multi(const std::vector<ConnectivityMatrix>& Bs,
                           const MembershipMatrix& Z, double rho,
                           const std::vector<int>& layers_per_group,
                           std::uint64_t seed, const SampleOptions& opts) {
  if (Bs.empty()) throw DataError("sampler: at least one group required");
  if (layers_per_group.size() != Bs.size())
    throw DataError("sampler: layers_per_group length must equal the group count");
  for (const auto& B : Bs) {
    if (B.K() != Bs[0].K())
      throw DataError("sampler: all group connectivities must share K");
  }
  int L = 0;
  std::vector<int> group_of;
  for (std::size_t g = 0; g < layers_per_group.size(); ++g) {
    if (layers_per_group[g] < 1)
      throw DataError("sampler: each group needs at least one layer");
    L += layers_per_group[g];
    group_of.insert(group_of.end(), layers_per_group[g], static_cast<int>(g));
  }
  check_inputs(Bs[0], Z, rho, L);
  std::vector<BinaryLayer> layers(static_cast<std::size_t>(L),
                                  BinaryLayer(Z.n(), {}));
  parallel_for(static_cast<std::size_t>(L), [&](std::size_t l) {
    layers[l] = sample_layer(Bs[group_of[l]], Z, rho,
                             seed ^ static_cast<std::uint64_t>(l), opts.self_loops);
  });
  return NetworkSample(std::move(layers), rho, group_of);
}

Eigen::MatrixXd expected_adjacency(const ConnectivityMatrix& B,
                                   const MembershipMatrix& Z, double rho) {
  if (B.K() != Z.K()) throw DataError("expected adjacency: dimension mismatch");
  if (rho < 0.0) throw DataError("expected adjacency: rho must be nonnegative");
  const int n = Z.n();
  Eigen::MatrixXd E(n, n);
  const auto& g = Z.labels();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) E(i, j) = rho * B.entries()(g[i], g[j]);
  return E;
}

AveragedAdjacency average_layers(const NetworkSample& sample,
                                 const std::optional<std::vector<int>>& subset) {
  return AveragedAdjacency::average(sample, subset);
}

}  // namespace netblock
