#include "netblock/theory.hpp"

#include <cmath>
#include <string>

#include "netblock/errors.hpp"

namespace netblock {

namespace {

const double kSqrt2 = std::sqrt(2.0);

void check_context(const TheoryContext& ctx) {
  if (ctx.n < 2) throw DataError("theory: n must be at least 2");
  if (ctx.K < 1 || ctx.L < 1) throw DataError("theory: K and L must be positive");
  if (!(ctx.rho > 0.0 && ctx.rho <= 1.0))
    throw DataError("theory: rho must lie in (0,1]");
  if (ctx.c1 < 1.0 || ctx.c2 < 1.0)
    throw DataError("theory: balance constants must be at least 1");
  if (ctx.misclustered < 0 || ctx.misclustered > ctx.n)
    throw DataError("theory: misclustered count out of range");
}

}  // namespace

double benchmark_lambda(const TheoryContext& ctx) {
  check_context(ctx);
  const double n = ctx.n, K = ctx.K, L = ctx.L, rho = ctx.rho;
  const double w = ctx.misclustered;
  const double wn = w / n;
  const double logn = std::log(n);

  const double term1 =
      16.0 * kSqrt2 * ctx.c1 * (1.0 / K) * std::sqrt(rho / L) *
      (std::sqrt(K) + std::sqrt(logn));

  const double prefactor =
      std::pow(std::sqrt(ctx.c1 / K) + kSqrt2 * std::sqrt(wn), 2.0);
  const double term2 =
      prefactor * (2.0 * kSqrt2 * rho * std::sqrt(ctx.c1 * n / K) * std::sqrt(w) *
                       ctx.B_op +
                   rho * w * ctx.B_max);

  const double tail = ctx.single_layer_variant
                          ? ctx.C_triple_prime.value_or(1.0) * std::sqrt(n * rho)
                          : 12.0 * kSqrt2 * std::sqrt(n * rho * logn / L);
  const double term3 =
      (2.0 * wn + 2.0 * kSqrt2 * std::sqrt(ctx.c1 / K) * std::sqrt(wn)) * tail;

  return term1 + term2 + term3;
}

double connectivity_error_bound(const TheoryContext& ctx) {
  check_context(ctx);
  if (ctx.d < 1) throw DataError("theory: rank d must be at least 1");
  const double n = ctx.n, K = ctx.K, L = ctx.L, rho = ctx.rho;
  const double wn = static_cast<double>(ctx.misclustered) / n;
  const double logn = std::log(n);

  const double term1 = 16.0 * kSqrt2 * (ctx.c1 / K) *
                       std::sqrt(1.0 / (L * n * n * rho)) *
                       (std::sqrt(K) + std::sqrt(logn));

  const double prefactor =
      std::pow(std::sqrt(ctx.c1 / K) + kSqrt2 * std::sqrt(wn), 2.0);
  const double term2 =
      prefactor * (2.0 * kSqrt2 * std::sqrt(ctx.c1 / K) * ctx.B_op * std::sqrt(wn) +
                   ctx.B_max * wn);

  const double tail = ctx.single_layer_variant
                          ? ctx.C_triple_prime.value_or(1.0) / std::sqrt(n * rho)
                          : 12.0 * kSqrt2 * std::sqrt(logn / (L * n * rho));
  const double term3 =
      (2.0 * kSqrt2 * std::sqrt(ctx.c1 / K) * std::sqrt(wn) + 2.0 * wn) * tail;

  return K * K * static_cast<double>(ctx.d) * (term1 + term2 + term3);
}

std::pair<double, double> lambda_window(const TheoryContext& ctx, double C) {
  if (C < 1.0) throw DataError("theory: window constant C must be at least 1");
  const double base = 3.0 * benchmark_lambda(ctx);
  return {base, C * base};
}

BalanceBoundResult balance_lower_bound(const MembershipMatrix& Z_hat,
                                       const Eigen::MatrixXd& B, double c2) {
  if (c2 < 1.0) throw DataError("theory: c2 must be at least 1");
  const int K = Z_hat.K();
  if (B.rows() != K || B.cols() != K)
    throw DataError("theory: B must be K x K");
  const double n = Z_hat.n();
  const double lo = n / (c2 * K);
  const double hi = c2 * n / K;
  for (int k = 0; k < K; ++k) {
    const double nk = Z_hat.community_sizes()[k];
    if (nk < lo - 1e-9 || nk > hi + 1e-9)
      throw DataError("theory: community " + std::to_string(k + 1) +
                      " violates the c2 balance window");
  }
  BalanceBoundResult out;
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l)
      out.lhs += Z_hat.community_sizes()[k] * Z_hat.community_sizes()[l] *
                 B(k, l) * B(k, l);
  out.lhs /= n;
  out.rhs = n / ((c2 * K) * (c2 * K)) * B.squaredNorm();
  out.holds = out.lhs >= out.rhs - 1e-12;
  return out;
}

ConditionReport check_conditions(const TheoryContext& ctx) {
  check_context(ctx);
  ConditionReport report;
  const double n = ctx.n, K = ctx.K, L = ctx.L, rho = ctx.rho;
  if (ctx.C_prime) {
    report.sample_size_ok =
        n * std::sqrt(L * rho) >=
        *ctx.C_prime * K * (std::sqrt(K) + std::sqrt(std::log(n)));
  }
  if (ctx.C_double_prime)
    report.density_ok = L * n * rho >= *ctx.C_double_prime * std::log(n);
  return report;
}

}  // namespace netblock
