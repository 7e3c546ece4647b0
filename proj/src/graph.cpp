#include "netblock/graph.hpp"

#include <algorithm>
#include <string>

#include "netblock/errors.hpp"

namespace netblock {

BinaryLayer::BinaryLayer(int n, std::vector<Edge> edges)
    : n_(n), edges_(std::move(edges)) {
  if (n_ < 1) throw DataError("layer: node count must be positive");
  const std::uint32_t un = static_cast<std::uint32_t>(n_);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& ed = edges_[e];
    if (ed.i > ed.j || ed.j >= un)
      throw DataError("layer: edge (" + std::to_string(ed.i) + "," +
                      std::to_string(ed.j) + ") out of range");
    if (e > 0 && !(edges_[e - 1] < ed))
      throw DataError("layer: edges must be sorted and unique");
  }
}

Eigen::MatrixXd BinaryLayer::dense() const {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_, n_);
  for (const Edge& e : edges_) {
    A(e.i, e.j) = 1.0;
    A(e.j, e.i) = 1.0;
  }
  return A;
}

std::vector<std::vector<std::uint32_t>> BinaryLayer::neighbor_lists() const {
  std::vector<std::vector<std::uint32_t>> nbrs(n_);
  for (const Edge& e : edges_) {
    nbrs[e.i].push_back(e.j);
    if (e.i != e.j) nbrs[e.j].push_back(e.i);
  }
  for (auto& v : nbrs) std::sort(v.begin(), v.end());
  return nbrs;
}

std::vector<int> BinaryLayer::degrees() const {
  std::vector<int> d(n_, 0);
  for (const Edge& e : edges_) {
    ++d[e.i];
    if (e.i != e.j) ++d[e.j];
  }
  return d;
}

NetworkSample::NetworkSample(std::vector<BinaryLayer> layers, double rho,
                             std::optional<std::vector<int>> group_labels)
    : rho_(rho), layers_(std::move(layers)), group_labels_(std::move(group_labels)) {
  if (layers_.empty()) throw DataError("sample: at least one layer required");
  if (!(rho_ > 0.0 && rho_ <= 1.0))
    throw DataError("sample: rho must lie in (0,1]");
  n_ = layers_[0].n();
  for (const auto& layer : layers_) {
    if (layer.n() != n_) throw DataError("sample: layers disagree on node count");
  }
  if (group_labels_ && static_cast<int>(group_labels_->size()) != L())
    throw DataError("sample: group label count must equal the layer count");
}

NetworkSample NetworkSample::subset(const std::vector<int>& layer_indices) const {
  if (layer_indices.empty()) throw DataError("sample: empty layer subset");
  std::vector<BinaryLayer> chosen;
  chosen.reserve(layer_indices.size());
  for (int idx : layer_indices) {
    if (idx < 0 || idx >= L())
      throw DataError("sample: layer index " + std::to_string(idx) + " out of range");
    chosen.push_back(layers_[idx]);
  }
  return NetworkSample(std::move(chosen), rho_);
}

AveragedAdjacency::AveragedAdjacency(int n, int layer_count,
                                     std::vector<Edge> coords,
                                     std::vector<double> values)
    : n_(n), layer_count_(layer_count), coords_(std::move(coords)),
      values_(std::move(values)) {}

AveragedAdjacency AveragedAdjacency::average(
    const NetworkSample& sample, const std::optional<std::vector<int>>& subset) {
  std::vector<int> idx;
  if (subset) {
    if (subset->empty()) throw DataError("average: empty layer subset");
    idx = *subset;
  } else {
    idx.resize(sample.L());
    for (int l = 0; l < sample.L(); ++l) idx[l] = l;
  }
  std::size_t total = 0;
  for (int l : idx) {
    if (l < 0 || l >= sample.L())
      throw DataError("average: layer index " + std::to_string(l) + " out of range");
    total += sample.layers()[l].edge_count();
  }
  std::vector<Edge> all;
  all.reserve(total);
  for (int l : idx) {
    const auto& edges = sample.layers()[l].edges();
    all.insert(all.end(), edges.begin(), edges.end());
  }
  std::sort(all.begin(), all.end());
  std::vector<Edge> coords;
  std::vector<double> values;
  const double inv = 1.0 / static_cast<double>(idx.size());
  for (std::size_t e = 0; e < all.size();) {
    std::size_t run = e + 1;
    while (run < all.size() && all[run] == all[e]) ++run;
    coords.push_back(all[e]);
    values.push_back(static_cast<double>(run - e) * inv);
    e = run;
  }
  return AveragedAdjacency(sample.n(), static_cast<int>(idx.size()),
                           std::move(coords), std::move(values));
}

AveragedAdjacency AveragedAdjacency::from_dense(const Eigen::MatrixXd& M,
                                                int layer_count) {
  if (M.rows() < 1 || M.rows() != M.cols())
    throw DataError("averaged adjacency: matrix must be square and nonempty");
  if (!M.allFinite()) throw NumericalError("averaged adjacency: non-finite entries");
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, M.cwiseAbs().maxCoeff()))
    throw DataError("averaged adjacency: matrix is not symmetric");
  if (M.minCoeff() < -1e-9 || M.maxCoeff() > 1.0 + 1e-9)
    throw DataError("averaged adjacency: entries must lie in [0,1]");
  std::vector<Edge> coords;
  std::vector<double> values;
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = i; j < M.cols(); ++j) {
      const double v = 0.5 * (M(i, j) + M(j, i));
      if (v != 0.0) {
        coords.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
        values.push_back(v);
      }
    }
  }
  return AveragedAdjacency(static_cast<int>(M.rows()), layer_count,
                           std::move(coords), std::move(values));
}

double AveragedAdjacency::frob2() const {
  double sum = 0.0;
  for (std::size_t e = 0; e < coords_.size(); ++e) {
    const double v2 = values_[e] * values_[e];
    sum += (coords_[e].i == coords_[e].j) ? v2 : 2.0 * v2;
  }
  return sum;
}

Eigen::MatrixXd AveragedAdjacency::dense() const {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_, n_);
  for (std::size_t e = 0; e < coords_.size(); ++e) {
    A(coords_[e].i, coords_[e].j) = values_[e];
    A(coords_[e].j, coords_[e].i) = values_[e];
  }
  return A;
}

Eigen::MatrixXd AveragedAdjacency::block_sums(const MembershipMatrix& Z) const {
  if (Z.n() != n_) throw DataError("block sums: membership size mismatch");
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(Z.K(), Z.K());
  const auto& g = Z.labels();
  for (std::size_t e = 0; e < coords_.size(); ++e) {
    const int gi = g[coords_[e].i];
    const int gj = g[coords_[e].j];
    if (coords_[e].i == coords_[e].j) {
      S(gi, gj) += values_[e];
    } else {
      S(gi, gj) += values_[e];
      S(gj, gi) += values_[e];
    }
  }
  return S;
}

Eigen::VectorXd AveragedAdjacency::diagonal_block_sums(const MembershipMatrix& Z) const {
  if (Z.n() != n_) throw DataError("block sums: membership size mismatch");
  Eigen::VectorXd d = Eigen::VectorXd::Zero(Z.K());
  const auto& g = Z.labels();
  for (std::size_t e = 0; e < coords_.size(); ++e) {
    if (coords_[e].i == coords_[e].j) d(g[coords_[e].i]) += values_[e];
  }
  return d;
}

}  // namespace netblock
