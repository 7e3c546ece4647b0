#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>

#include "netblock/types.hpp"

namespace netblock {

/// Inputs for the theoretical diagnostics. c1/c2 are the community-balance
/// constants, misclustered the number of wrongly assigned nodes, B_op/B_max
/// the operator norm and largest absolute entry of the true connectivity.
/// The C constants are user-supplied; conditions that need them are reported
/// as unchecked when absent.
struct TheoryContext {
  int n = 0;
  int K = 0;
  int L = 0;
  double rho = 0.0;
  int d = 0;
  double c1 = 1.0;
  double c2 = 1.0;
  int misclustered = 0;
  double B_op = 0.0;
  double B_max = 0.0;
  std::optional<double> C_prime;
  std::optional<double> C_double_prime;
  std::optional<double> C_triple_prime;
  bool single_layer_variant = false;  // sharper aggregate-noise term for L = 1
};

/// Benchmark penalty level anchoring the theoretically valid lambda window
/// (three summands: aggregate noise, misclustering bias, cross term).
double benchmark_lambda(const TheoryContext& ctx);

/// Right-hand side of the Frobenius-error bound with the suppressed
/// proportionality constant set to 1 ("up to constants"); a reporting tool,
/// never a pass/fail gate.
double connectivity_error_bound(const TheoryContext& ctx);

/// (3 * benchmark, 3 * C * benchmark) for comparing a cross-validated lambda
/// against the theoretically valid window.
std::pair<double, double> lambda_window(const TheoryContext& ctx, double C);

struct BalanceBoundResult {
  double lhs = 0.0;  // (1/n) ||Z B Z^T||_F^2
  double rhs = 0.0;  // (n / (c2 K)^2) ||B||_F^2
  bool holds = false;
};

/// Blockwise Frobenius lower bound under balanced estimated communities;
/// errors if the membership violates the c2 balance window.
BalanceBoundResult balance_lower_bound(const MembershipMatrix& Z_hat,
                                       const Eigen::MatrixXd& B, double c2);

struct ConditionReport {
  std::optional<bool> sample_size_ok;  // n sqrt(L rho) >= C' K (sqrt K + sqrt log n)
  std::optional<bool> density_ok;      // L n rho >= C'' log n
};

/// Checks the sample-size side conditions when their constants are supplied;
/// fields stay empty (unchecked) otherwise.
ConditionReport check_conditions(const TheoryContext& ctx);

}  // namespace netblock
