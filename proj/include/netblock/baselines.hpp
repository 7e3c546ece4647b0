#pragma once

#include <string>

#include "netblock/graph.hpp"
#include "netblock/tuning.hpp"
#include "netblock/types.hpp"

namespace netblock {

struct BaselineResult {
  ConnectivityMatrix B_hat{Eigen::MatrixXd::Zero(1, 1)};
  int d_hat = 0;
  std::string method;
};

/// Blockwise mean: B_kl = Z_k^T A Z_l / (rho nhat_k nhat_l). Diagonal cells
/// are included in the k = l blocks by default; include_diagonal=false
/// switches to the loop-free convention with denominator nhat_k (nhat_k - 1).
BaselineResult averaging_estimator(const AveragedAdjacency& Y,
                                   const MembershipMatrix& Z, double rho,
                                   bool include_diagonal = true);

/// Best rank-d approximation of the averaging estimate: keep the d eigenpairs
/// of largest magnitude.
BaselineResult avg_lowrank(const AveragedAdjacency& Y, const MembershipMatrix& Z,
                           double rho, int d);

/// Averaging applied to the rank-r spectral truncation of the averaged
/// adjacency (r leading eigenpairs by magnitude).
BaselineResult spectral_embedding_estimator(const AveragedAdjacency& Y,
                                            const MembershipMatrix& Z, double rho,
                                            int r);

struct RankCvResult {
  int d = 0;
  std::vector<double> total_loss;  // indexed by rank - 1
};

/// Picks the truncation rank for avg_lowrank by cross-validation over layers,
/// reusing the same split structure as the lambda CV. Ties break toward the
/// smaller rank.
RankCvResult avg_lowrank_rank_cv(const NetworkSample& sample,
                                 const MembershipMatrix& Z, const CvPlan& plan);

}  // namespace netblock
