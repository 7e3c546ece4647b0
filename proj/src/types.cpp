#include "netblock/types.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <numeric>
#include <string>

#include "netblock/errors.hpp"

namespace netblock {

MembershipMatrix::MembershipMatrix(std::vector<int> labels, int K)
    : K_(K), labels_(std::move(labels)) {
  if (K_ < 1) throw DataError("membership: K must be at least 1");
  if (labels_.empty()) throw DataError("membership: empty label vector");
  sizes_.assign(K_, 0);
  members_.assign(K_, {});
  for (int i = 0; i < static_cast<int>(labels_.size()); ++i) {
    const int g = labels_[i];
    if (g < 0 || g >= K_)
      throw DataError("membership: label " + std::to_string(g + 1) +
                      " out of range [1.." + std::to_string(K_) + "]");
    ++sizes_[g];
    members_[g].push_back(i);
  }
}

MembershipMatrix MembershipMatrix::from_sizes(const std::vector<int>& sizes) {
  if (sizes.empty()) throw DataError("membership: no community sizes given");
  std::vector<int> labels;
  for (int k = 0; k < static_cast<int>(sizes.size()); ++k) {
    if (sizes[k] < 0) throw DataError("membership: negative community size");
    labels.insert(labels.end(), sizes[k], k);
  }
  return MembershipMatrix(std::move(labels), static_cast<int>(sizes.size()));
}

MembershipMatrix MembershipMatrix::from_one_based(const std::vector<int>& labels,
                                                  int K) {
  std::vector<int> shifted(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) shifted[i] = labels[i] - 1;
  return MembershipMatrix(std::move(shifted), K);
}

int MembershipMatrix::min_community_size() const {
  int m = sizes_[0];
  for (int s : sizes_) m = std::min(m, s);
  return m;
}

Eigen::MatrixXd MembershipMatrix::indicator() const {
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n(), K_);
  for (int i = 0; i < n(); ++i) Z(i, labels_[i]) = 1.0;
  return Z;
}

ConnectivityMatrix::ConnectivityMatrix(Eigen::MatrixXd entries, bool probability,
                                       std::optional<int> rank_hint)
    : entries_(std::move(entries)), probability_(probability), rank_hint_(rank_hint) {
  if (entries_.rows() < 1 || entries_.rows() != entries_.cols())
    throw DataError("connectivity: matrix must be square and nonempty");
  if (!entries_.allFinite())
    throw NumericalError("connectivity: non-finite entries");
  for (int k = 0; k < entries_.rows(); ++k) {
    for (int l = k + 1; l < entries_.cols(); ++l) {
      if (entries_(k, l) != entries_(l, k))
        throw DataError("connectivity: matrix is not symmetric");
    }
  }
  if (probability_) {
    const double lo = entries_.minCoeff();
    const double hi = entries_.maxCoeff();
    if (lo < -1e-12 || hi > 1.0 + 1e-12)
      throw DataError("connectivity: probabilities must lie in [0,1]");
  }
  if (rank_hint_) {
    if (*rank_hint_ < 0 || *rank_hint_ > entries_.rows())
      throw DataError("connectivity: rank hint out of range");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(entries_);
    const auto& sv = svd.singularValues();
    int rank = 0;
    if (sv.size() > 0 && sv(0) > 0.0) {
      for (int j = 0; j < sv.size(); ++j)
        if (sv(j) > 1e-10 * sv(0)) ++rank;
    }
    if (rank != *rank_hint_)
      throw DataError("connectivity: numerical rank " + std::to_string(rank) +
                      " does not match rank hint " + std::to_string(*rank_hint_));
  }
}

ConnectivityMatrix ConnectivityMatrix::symmetrized(const Eigen::MatrixXd& entries,
                                                   bool probability,
                                                   std::optional<int> rank_hint) {
  Eigen::MatrixXd sym = 0.5 * (entries + entries.transpose());
  return ConnectivityMatrix(std::move(sym), probability, rank_hint);
}

}  // namespace netblock
