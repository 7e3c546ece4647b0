#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "netblock/graph.hpp"
#include "netblock/types.hpp"

namespace netblock {

/// Loss scaling of the penalized least-squares objective. raw uses
/// ||Y - X W X^T||_F^2; per_node divides the loss by n, which rescales the
/// penalty weight by the same factor (lambda_raw = n * lambda_per_node for
/// the same minimizer).
enum class Scaling { raw, per_node };

struct AdmmConfig {
  double lambda = 0.0;  // must be set > 0 before solving
  double rho1 = 1.0;    // augmented-Lagrangian parameter
  double epsilon = 1e-10;
  int max_iters = 10000;
  Scaling scaling = Scaling::per_node;
  bool clip = true;  // clamp B entries into [0,1] after unscaling
};

struct AdmmState {
  Eigen::MatrixXd W, V, Theta;
  int iter = 0;
  double w_change = 0.0;         // last ||W^t - W^{t-1}||_F^2 / K^2
  double primal_residual = 0.0;  // ||V - W||_F
};

/// Y compressed against a membership matrix: the solver and the validation
/// loss only touch Y through Z^T Y Z, ||Y||_F^2 and n.
struct BlockTarget {
  Eigen::MatrixXd S;     // Z^T Y Z
  double y_frob2 = 0.0;  // ||Y||_F^2
  int n = 0;
  Eigen::VectorXd nhat;  // community sizes
};

BlockTarget compress(const AveragedAdjacency& Y, const MembershipMatrix& Z);

struct SolveResult {
  // clipped to [0,1] when cfg.clip is set
  ConnectivityMatrix B_hat{Eigen::MatrixXd::Zero(1, 1)};
  Eigen::MatrixXd B_hat_raw;   // unclipped W_rho / rho
  Eigen::MatrixXd W_rho;       // solution on the rho*B scale
  int d_hat = 0;
  double lambda_used = 0.0;
  int iterations = 0;
  double objective_value = 0.0;
  bool converged = false;
  double clipped_fraction = 0.0;
  AdmmState state;  // final iterates, reusable as a warm start
};

/// Quadratic step of the splitting: the unique minimizer of
/// ||Y - X W X^T||_F^2 + (rho1/2) ||V - W + Theta||_F^2, computed through the
/// eigendecomposition of X^T X (the Kronecker normal equations are never
/// materialized).
Eigen::MatrixXd w_update(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                         const Eigen::MatrixXd& V, const Eigen::MatrixXd& Theta,
                         double rho1);

/// Singular value thresholding step: svt(W - Theta, lambda / rho1).
Eigen::MatrixXd v_update(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Theta,
                         double lambda, double rho1);

/// Dual ascent step: Theta + V - W.
Eigen::MatrixXd theta_update(const Eigen::MatrixXd& Theta, const Eigen::MatrixXd& V,
                             const Eigen::MatrixXd& W);

/// Smallest penalty weight for which the solution is the zero matrix:
/// 2 ||X^T Y X||_op under raw scaling, divided by n under per-node scaling.
double lambda_max(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                  Scaling scaling = Scaling::raw);
double lambda_max(const AveragedAdjacency& Y, const MembershipMatrix& Z,
                  Scaling scaling);
double lambda_max(const BlockTarget& target, Scaling scaling);

/// Full nuclear-norm-penalized solve from zero initialization; returns
/// B_hat = W_rho / rho and the rank read off the thresholding variable.
SolveResult admm_solve(const AveragedAdjacency& Y, const MembershipMatrix& Z,
                       double rho, const AdmmConfig& cfg);
SolveResult admm_solve(const BlockTarget& target, double rho, const AdmmConfig& cfg,
                       const AdmmState* warm_start = nullptr);

/// Solves an ascending lambda grid smallest-first, warm starting each solve
/// from the previous solution. Results are in grid order.
std::vector<SolveResult> solve_path(const AveragedAdjacency& Y,
                                    const MembershipMatrix& Z, double rho,
                                    const std::vector<double>& lambdas,
                                    const AdmmConfig& cfg);
std::vector<SolveResult> solve_path(const BlockTarget& target, double rho,
                                    const std::vector<double>& lambdas,
                                    const AdmmConfig& cfg);

/// ||Y - X W X^T||_F^2 (+ lambda ||W||_* for the penalized form) evaluated
/// through the compressed representation.
double residual_frob2(const BlockTarget& target, const Eigen::MatrixXd& W_rho);
double penalized_objective(const BlockTarget& target, const Eigen::MatrixXd& W_rho,
                           double lambda, Scaling scaling);

}  // namespace netblock
