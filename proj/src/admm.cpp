#include "netblock/admm.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "netblock/errors.hpp"
#include "netblock/numerics.hpp"

namespace netblock {

namespace {

void check_config(const AdmmConfig& cfg) {
  if (!(cfg.lambda > 0.0)) throw DataError("admm: lambda must be positive");
  if (!(cfg.rho1 > 0.0)) throw DataError("admm: rho1 must be positive");
  if (!(cfg.epsilon > 0.0)) throw DataError("admm: epsilon must be positive");
  if (cfg.max_iters < 1) throw DataError("admm: max_iters must be at least 1");
}

double nuclear_norm(const Eigen::MatrixXd& M) {
  return svd_full(M).singular_values.sum();
}

}  // namespace

BlockTarget compress(const AveragedAdjacency& Y, const MembershipMatrix& Z) {
  BlockTarget t;
  t.S = Y.block_sums(Z);
  t.y_frob2 = Y.frob2();
  t.n = Y.n();
  t.nhat.resize(Z.K());
  for (int k = 0; k < Z.K(); ++k) t.nhat(k) = Z.community_sizes()[k];
  return t;
}

Eigen::MatrixXd w_update(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                         const Eigen::MatrixXd& V, const Eigen::MatrixXd& Theta,
                         double rho1) {
  if (!(rho1 > 0.0)) throw DataError("w_update: rho1 must be positive");
  const int K = static_cast<int>(X.cols());
  if (Y.rows() != X.rows() || Y.rows() != Y.cols() || V.rows() != K ||
      V.cols() != K || Theta.rows() != K || Theta.cols() != K)
    throw DataError("w_update: dimension mismatch");
  // Normal equations (2 C^T C + rho1 I) w = 2 C^T y + rho1 (theta + v) with
  // C = X (x) X diagonalize through X^T X = Q D Q^T.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X.transpose() * X);
  if (es.info() != Eigen::Success)
    throw NumericalError("w_update: eigendecomposition of X^T X failed");
  const Eigen::MatrixXd& Q = es.eigenvectors();
  const Eigen::VectorXd& d = es.eigenvalues();
  const Eigen::MatrixXd R = 2.0 * X.transpose() * Y * X + rho1 * (V + Theta);
  Eigen::MatrixXd T = Q.transpose() * R * Q;
  for (int a = 0; a < K; ++a)
    for (int b = 0; b < K; ++b) T(a, b) /= 2.0 * d(a) * d(b) + rho1;
  return Q * T * Q.transpose();
}

Eigen::MatrixXd v_update(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Theta,
                         double lambda, double rho1) {
  if (!(lambda > 0.0) || !(rho1 > 0.0))
    throw DataError("v_update: lambda and rho1 must be positive");
  return svt(W - Theta, lambda / rho1);
}

Eigen::MatrixXd theta_update(const Eigen::MatrixXd& Theta, const Eigen::MatrixXd& V,
                             const Eigen::MatrixXd& W) {
  if (Theta.rows() != V.rows() || Theta.cols() != V.cols() ||
      V.rows() != W.rows() || V.cols() != W.cols())
    throw DataError("theta_update: dimension mismatch");
  return Theta + V - W;
}

double lambda_max(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                  Scaling scaling) {
  if (Y.rows() != X.rows() || Y.rows() != Y.cols())
    throw DataError("lambda_max: dimension mismatch");
  const double value = 2.0 * operator_norm(X.transpose() * Y * X);
  return scaling == Scaling::per_node ? value / static_cast<double>(Y.rows()) : value;
}

double lambda_max(const BlockTarget& target, Scaling scaling) {
  const double value = 2.0 * operator_norm(target.S);
  return scaling == Scaling::per_node ? value / static_cast<double>(target.n) : value;
}

double lambda_max(const AveragedAdjacency& Y, const MembershipMatrix& Z,
                  Scaling scaling) {
  return lambda_max(compress(Y, Z), scaling);
}

double residual_frob2(const BlockTarget& target, const Eigen::MatrixXd& W_rho) {
  // ||Y - Z W Z^T||_F^2 = ||Y||_F^2 - 2 <S, W> + sum_kl nhat_k nhat_l W_kl^2
  double quad = 0.0;
  const int K = static_cast<int>(target.S.rows());
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l)
      quad += target.nhat(k) * target.nhat(l) * W_rho(k, l) * W_rho(k, l);
  const double cross = (target.S.array() * W_rho.array()).sum();
  return target.y_frob2 - 2.0 * cross + quad;
}

double penalized_objective(const BlockTarget& target, const Eigen::MatrixXd& W_rho,
                           double lambda, Scaling scaling) {
  const double s =
      scaling == Scaling::per_node ? 1.0 / static_cast<double>(target.n) : 1.0;
  return s * residual_frob2(target, W_rho) + lambda * nuclear_norm(W_rho);
}

SolveResult admm_solve(const BlockTarget& target, double rho, const AdmmConfig& cfg,
                       const AdmmState* warm_start) {
  check_config(cfg);
  if (!(rho > 0.0 && rho <= 1.0)) throw DataError("admm: rho must lie in (0,1]");
  const int K = static_cast<int>(target.S.rows());
  for (int k = 0; k < K; ++k) {
    if (target.nhat(k) < 1.0)
      throw DataError("admm: estimated community " + std::to_string(k + 1) +
                      " is empty; merge or re-cluster before solving");
  }

  const double s =
      cfg.scaling == Scaling::per_node ? 1.0 / static_cast<double>(target.n) : 1.0;
  const double tau = cfg.lambda / cfg.rho1;
  // Entrywise normal equations: with membership X, C^T C = diag(nhat) (x)
  // diag(nhat), so the W step is a pointwise divide.
  Eigen::MatrixXd denom(K, K);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l)
      denom(k, l) = 2.0 * s * target.nhat(k) * target.nhat(l) + cfg.rho1;
  const Eigen::MatrixXd numS = 2.0 * s * target.S;

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(K, K);
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(K, K);
  Eigen::MatrixXd Theta = Eigen::MatrixXd::Zero(K, K);
  if (warm_start) {
    W = warm_start->W;
    V = warm_start->V;
    Theta = warm_start->Theta;
  }

  const double K2 = static_cast<double>(K) * static_cast<double>(K);
  bool converged = false;
  int iter = 0;
  int v_rank = 0;
  double w_change = 0.0;
  double primal2 = 0.0;
  for (iter = 1; iter <= cfg.max_iters; ++iter) {
    const Eigen::MatrixXd W_new =
        (numS + cfg.rho1 * (Theta + V)).cwiseQuotient(denom);
    w_change = (W_new - W).squaredNorm() / K2;
    SvtResult sres = svt_with_rank(W_new - Theta, tau);
    V = std::move(sres.value);
    v_rank = sres.rank;
    Theta += V - W_new;
    primal2 = (V - W_new).squaredNorm() / K2;
    W = W_new;
    if (!W.allFinite() || !V.allFinite() || !Theta.allFinite())
      throw NumericalError("admm: iterates diverged (non-finite values)");
    // The step-change criterion alone can fire while V and W still disagree
    // (the dual accumulates slowly when rho1 is small relative to the data
    // term), so convergence additionally requires primal feasibility at the
    // same tolerance.
    if (w_change <= cfg.epsilon && primal2 <= cfg.epsilon) {
      converged = true;
      break;
    }
  }
  if (!converged) iter = cfg.max_iters;

  const double primal_residual = (V - W).norm();
  const double residual_gate =
      10.0 * std::sqrt(K2 * cfg.epsilon);
  // V carries the exact sparsity pattern produced by the thresholding; it is
  // the reported solution whenever it agrees with W.
  const bool trust_v = primal_residual <= residual_gate;
  Eigen::MatrixXd reported = trust_v ? V : W;
  const int d_hat = trust_v ? v_rank : numerical_rank(W, 1e-6);

  SolveResult out;
  out.W_rho = reported;
  out.B_hat_raw = reported / rho;
  out.d_hat = d_hat;
  out.lambda_used = cfg.lambda;
  out.iterations = iter;
  out.converged = converged;
  out.objective_value = penalized_objective(target, reported, cfg.lambda, cfg.scaling);
  out.state = AdmmState{W, V, Theta, iter, w_change, primal_residual};

  Eigen::MatrixXd B = out.B_hat_raw;
  int clipped = 0;
  if (cfg.clip) {
    for (int k = 0; k < K; ++k) {
      for (int l = 0; l < K; ++l) {
        if (B(k, l) < 0.0 || B(k, l) > 1.0) {
          B(k, l) = std::clamp(B(k, l), 0.0, 1.0);
          ++clipped;
        }
      }
    }
  }
  out.clipped_fraction = static_cast<double>(clipped) / K2;
  const bool in_range = B.minCoeff() >= -1e-12 && B.maxCoeff() <= 1.0 + 1e-12;
  out.B_hat = ConnectivityMatrix(std::move(B), cfg.clip || in_range);
  return out;
}

SolveResult admm_solve(const AveragedAdjacency& Y, const MembershipMatrix& Z,
                       double rho, const AdmmConfig& cfg) {
  return admm_solve(compress(Y, Z), rho, cfg, nullptr);
}

std::vector<SolveResult> solve_path(const BlockTarget& target, double rho,
                                    const std::vector<double>& lambdas,
                                    const AdmmConfig& cfg) {
  if (lambdas.empty()) throw DataError("solve_path: empty lambda grid");
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    if (!(lambdas[j] > 0.0))
      throw DataError("solve_path: lambda grid must be positive");
    if (j > 0 && !(lambdas[j] > lambdas[j - 1]))
      throw DataError("solve_path: lambda grid must be strictly ascending");
  }
  std::vector<SolveResult> results;
  results.reserve(lambdas.size());
  AdmmConfig local = cfg;
  const AdmmState* warm = nullptr;
  for (double lambda : lambdas) {
    local.lambda = lambda;
    results.push_back(admm_solve(target, rho, local, warm));
    warm = &results.back().state;
  }
  return results;
}

std::vector<SolveResult> solve_path(const AveragedAdjacency& Y,
                                    const MembershipMatrix& Z, double rho,
                                    const std::vector<double>& lambdas,
                                    const AdmmConfig& cfg) {
  return solve_path(compress(Y, Z), rho, lambdas, cfg);
}

}  // namespace netblock
