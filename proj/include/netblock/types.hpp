#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace netblock {

/// One-hot node-to-community assignment. Labels are 0-based internally;
/// file formats use 1..K.
class MembershipMatrix {
 public:
  MembershipMatrix(std::vector<int> labels, int K);

  /// Block-ordered labels: the first sizes[0] nodes get community 0, etc.
  static MembershipMatrix from_sizes(const std::vector<int>& sizes);
  static MembershipMatrix from_one_based(const std::vector<int>& labels, int K);

  int n() const { return static_cast<int>(labels_.size()); }
  int K() const { return K_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<int>& community_sizes() const { return sizes_; }
  const std::vector<std::vector<int>>& members() const { return members_; }
  int min_community_size() const;

  /// Dense n x K one-hot matrix Z.
  Eigen::MatrixXd indicator() const;

 private:
  int K_;
  std::vector<int> labels_;
  std::vector<int> sizes_;
  std::vector<std::vector<int>> members_;
};

/// Symmetric K x K block connectivity matrix. With probability=true all
/// entries must lie in [0,1]; diagnostic matrices may relax that. When
/// rank_hint is set, the count of singular values above 1e-10 * sigma_1 must
/// equal it.
class ConnectivityMatrix {
 public:
  explicit ConnectivityMatrix(Eigen::MatrixXd entries, bool probability = true,
                              std::optional<int> rank_hint = std::nullopt);

  /// Builds from (M + M^T)/2; for matrices symmetric only up to rounding.
  static ConnectivityMatrix symmetrized(const Eigen::MatrixXd& entries,
                                        bool probability = true,
                                        std::optional<int> rank_hint = std::nullopt);

  int K() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  bool probability() const { return probability_; }
  std::optional<int> rank_hint() const { return rank_hint_; }

 private:
  Eigen::MatrixXd entries_;
  bool probability_;
  std::optional<int> rank_hint_;
};

}  // namespace netblock
