#include "netblock/baselines.hpp"

#include <algorithm>
#include <string>

#include "netblock/errors.hpp"
#include "netblock/numerics.hpp"
#include "netblock/parallel.hpp"

namespace netblock {

namespace {

Eigen::MatrixXd averaging_matrix(const Eigen::MatrixXd& S, const Eigen::VectorXd& nhat,
                                 const Eigen::VectorXd& diag_sums, double rho,
                                 bool include_diagonal) {
  const int K = static_cast<int>(S.rows());
  Eigen::MatrixXd B(K, K);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < K; ++l) {
      double numer = S(k, l);
      double cells = nhat(k) * nhat(l);
      if (k == l && !include_diagonal) {
        numer -= diag_sums(k);
        cells = nhat(k) * (nhat(k) - 1.0);
      }
      if (cells < 1.0)
        throw DataError("averaging: no cells in block (" + std::to_string(k + 1) +
                        "," + std::to_string(l + 1) + ")");
      B(k, l) = numer / (rho * cells);
    }
  }
  return 0.5 * (B + B.transpose()).eval();
}

BaselineResult make_result(Eigen::MatrixXd B, const std::string& method) {
  const bool in_range = B.minCoeff() >= -1e-12 && B.maxCoeff() <= 1.0 + 1e-12;
  BaselineResult out;
  out.d_hat = numerical_rank(B);
  out.B_hat = ConnectivityMatrix::symmetrized(std::move(B), in_range);
  out.method = method;
  return out;
}

Eigen::MatrixXd truncated_eig(const Eigen::MatrixXd& M, int d) {
  const SpectrumResult top = sym_eig_topk(M, d, EigOrder::by_magnitude);
  return top.vectors * top.values.asDiagonal() * top.vectors.transpose();
}

}  // namespace

BaselineResult averaging_estimator(const AveragedAdjacency& Y,
                                   const MembershipMatrix& Z, double rho,
                                   bool include_diagonal) {
  if (!(rho > 0.0)) throw DataError("averaging: rho must be positive");
  if (Z.min_community_size() < 1) throw DataError("averaging: empty community");
  const Eigen::MatrixXd S = Y.block_sums(Z);
  Eigen::VectorXd nhat(Z.K());
  for (int k = 0; k < Z.K(); ++k) nhat(k) = Z.community_sizes()[k];
  const Eigen::VectorXd diag_sums = Y.diagonal_block_sums(Z);
  return make_result(averaging_matrix(S, nhat, diag_sums, rho, include_diagonal),
                     "averaging");
}

BaselineResult avg_lowrank(const AveragedAdjacency& Y, const MembershipMatrix& Z,
                           double rho, int d) {
  if (d < 1 || d > Z.K()) throw DataError("avg_lowrank: rank out of range");
  const BaselineResult avg = averaging_estimator(Y, Z, rho);
  return make_result(truncated_eig(avg.B_hat.entries(), d), "avg_lowrank");
}

BaselineResult spectral_embedding_estimator(const AveragedAdjacency& Y,
                                            const MembershipMatrix& Z, double rho,
                                            int r) {
  if (r < 1 || r > Y.n()) throw DataError("spectral embedding: rank out of range");
  if (!(rho > 0.0)) throw DataError("spectral embedding: rho must be positive");
  if (Z.min_community_size() < 1)
    throw DataError("spectral embedding: empty community");
  const SpectrumResult top = sym_eig_topk(Y.dense(), r, EigOrder::by_magnitude);
  // Block sums of the truncation sum_j lambda_j u_j u_j^T without forming it:
  // Z^T A^(r) Z = P diag(lambda) P^T with P = Z^T U.
  const Eigen::MatrixXd P = Z.indicator().transpose() * top.vectors;
  const Eigen::MatrixXd S = P * top.values.asDiagonal() * P.transpose();
  Eigen::VectorXd nhat(Z.K());
  for (int k = 0; k < Z.K(); ++k) nhat(k) = Z.community_sizes()[k];
  const Eigen::VectorXd zero_diag = Eigen::VectorXd::Zero(Z.K());
  return make_result(averaging_matrix(S, nhat, zero_diag, rho, true),
                     "spectral_embedding");
}

RankCvResult avg_lowrank_rank_cv(const NetworkSample& sample,
                                 const MembershipMatrix& Z, const CvPlan& plan) {
  if (plan.splits.empty()) throw DataError("rank cv: plan has no splits");
  const int K = Z.K();
  const int S = static_cast<int>(plan.splits.size());
  Eigen::MatrixXd losses(S, K);
  parallel_for(static_cast<std::size_t>(S), [&](std::size_t s) {
    const CvSplit& split = plan.splits[s];
    const AveragedAdjacency train = AveragedAdjacency::average(sample, split.train);
    const BlockTarget val =
        compress(AveragedAdjacency::average(sample, split.validation), Z);
    const Eigen::MatrixXd B_avg =
        averaging_estimator(train, Z, sample.rho()).B_hat.entries();
    for (int d = 1; d <= K; ++d) {
      const Eigen::MatrixXd W_rho = sample.rho() * truncated_eig(B_avg, d);
      losses(static_cast<int>(s), d - 1) = residual_frob2(val, W_rho);
    }
  });
  RankCvResult out;
  out.total_loss.assign(K, 0.0);
  for (int s = 0; s < S; ++s)
    for (int d = 0; d < K; ++d) out.total_loss[d] += losses(s, d);
  int best = 0;
  for (int d = 1; d < K; ++d)
    if (out.total_loss[d] < out.total_loss[best]) best = d;
  out.d = best + 1;
  return out;
}

}  // namespace netblock
