#include <doctest.h>

#include <Eigen/Dense>

#include "netblock/admm.hpp"
#include "netblock/errors.hpp"
#include "netblock/numerics.hpp"
#include "netblock/rng.hpp"
#include "netblock/sampler.hpp"
#include "support/oracles.hpp"

using namespace netblock;

namespace {

AdmmConfig tight_config(double lambda, Scaling scaling = Scaling::per_node) {
  AdmmConfig cfg;
  cfg.lambda = lambda;
  cfg.epsilon = 1e-18;
  cfg.max_iters = 300000;
  cfg.scaling = scaling;
  return cfg;
}

AveragedAdjacency noiseless_average(const ConnectivityMatrix& B,
                                    const MembershipMatrix& Z, double rho) {
  return AveragedAdjacency::from_dense(expected_adjacency(B, Z, rho));
}

}  // namespace

TEST_CASE("w_update closed forms") {
  SUBCASE("identity design with two nodes") {
    const Eigen::MatrixXd W =
        w_update(Eigen::Vector2d(4.0, 4.0).asDiagonal(),
                 Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(2, 2),
                 Eigen::MatrixXd::Zero(2, 2), 2.0);
    CHECK(W.isApprox(Eigen::Vector2d(2.0, 2.0).asDiagonal().toDenseMatrix()));
  }
  SUBCASE("matches the dense Kronecker normal equations") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
      const int n = 5 + static_cast<int>(rng.uniform_below(6));
      const int K = 2 + static_cast<int>(rng.uniform_below(3));
      Eigen::MatrixXd X(n, K);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < K; ++k) X(i, k) = rng.normal();
      const Eigen::MatrixXd Y = oracles::random_symmetric(rng, n, -1.0, 1.0);
      const Eigen::MatrixXd V = oracles::random_symmetric(rng, K, -1.0, 1.0);
      const Eigen::MatrixXd Theta = oracles::random_symmetric(rng, K, -1.0, 1.0);
      const double rho1 = rng.uniform(0.1, 3.0);
      const Eigen::MatrixXd fast = w_update(Y, X, V, Theta, rho1);
      const Eigen::MatrixXd slow = oracles::kronecker_w_update(Y, X, V, Theta, rho1);
      CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
  SUBCASE("rho1 -> 0 recovers the blockwise average") {
    const auto Z = MembershipMatrix::from_sizes({3, 2});
    const Eigen::MatrixXd X = Z.indicator();
    Rng rng(22);
    const Eigen::MatrixXd Y = oracles::random_symmetric(rng, 5, 0.0, 1.0);
    const Eigen::MatrixXd W = w_update(Y, X, Eigen::MatrixXd::Zero(2, 2),
                                       Eigen::MatrixXd::Zero(2, 2), 1e-12);
    const Eigen::MatrixXd S = X.transpose() * Y * X;
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) {
        const double nn = Z.community_sizes()[k] * Z.community_sizes()[l];
        CHECK(W(k, l) == doctest::Approx(S(k, l) / nn).epsilon(1e-6));
      }
  }
  SUBCASE("exact data with V = W0 and zero dual is a fixed point") {
    Rng rng(23);
    const auto Z = MembershipMatrix::from_sizes({2, 3, 2});
    const Eigen::MatrixXd X = Z.indicator();
    const Eigen::MatrixXd W0 = oracles::random_symmetric(rng, 3, -1.0, 1.0);
    const Eigen::MatrixXd Y = X * W0 * X.transpose();
    const Eigen::MatrixXd W =
        w_update(Y, X, W0, Eigen::MatrixXd::Zero(3, 3), 0.7);
    CHECK((W - W0).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("v_update is singular value thresholding of W - Theta") {
  const Eigen::MatrixXd W = Eigen::Vector2d(3.0, 1.0).asDiagonal();
  const Eigen::MatrixXd Z2 = Eigen::MatrixXd::Zero(2, 2);
  CHECK(v_update(W, Z2, 2.0, 1.0)
            .isApprox(Eigen::Vector2d(1.0, 0.0).asDiagonal().toDenseMatrix()));
  CHECK(v_update(W, Z2, 6.0, 2.0).isZero());  // lambda/rho1 = 3 >= sigma_1
  CHECK((v_update(W, Z2, 1e-14, 1.0) - W).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("theta_update is the dual ascent step") {
  Rng rng(24);
  const Eigen::MatrixXd T = oracles::random_symmetric(rng, 2, -1.0, 1.0);
  const Eigen::MatrixXd W = oracles::random_symmetric(rng, 2, -1.0, 1.0);
  CHECK(theta_update(T, W, W).isApprox(T));
  CHECK(theta_update(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2),
                     Eigen::MatrixXd::Zero(2, 2))
            .isApprox(Eigen::MatrixXd::Identity(2, 2)));
  const Eigen::MatrixXd V = oracles::random_symmetric(rng, 2, -1.0, 1.0);
  CHECK(theta_update(T, V, W).isApprox(T + V - W));
}

TEST_CASE("noiseless input is recovered with the correct rank") {
  Rng rng(25);
  const int K = 4, d = 2;
  const ConnectivityMatrix B(oracles::random_lowrank_probability(rng, K, d));
  const auto Z = MembershipMatrix::from_sizes({12, 9, 11, 8});
  const double rho = 0.8;
  const AveragedAdjacency Y = noiseless_average(B, Z, rho);
  const double lmax = lambda_max(Y, Z, Scaling::per_node);
  const SolveResult res = admm_solve(Y, Z, rho, tight_config(1e-8 * lmax));
  CHECK(res.converged);
  CHECK((res.B_hat.entries() - B.entries()).norm() <= 1e-4);
  CHECK(res.d_hat == d);
}

TEST_CASE("lambda_max thresholds the zero solution") {
  SUBCASE("hand cases") {
    CHECK(lambda_max(Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Identity(3, 2)) ==
          doctest::Approx(0.0));
    Eigen::MatrixXd Y(1, 1);
    Y << 1.0;
    CHECK(lambda_max(Y, Eigen::MatrixXd::Identity(1, 1), Scaling::raw) ==
          doctest::Approx(2.0));
  }
  SUBCASE("solver agrees on both sides of the threshold") {
    const auto inst = oracles::random_sbm_instance(301);
    const auto sample = sample_mono(inst.B, inst.Z, inst.rho, inst.L, 301);
    const AveragedAdjacency Y = average_layers(sample);
    const double lmax = lambda_max(Y, inst.Z, Scaling::per_node);
    REQUIRE(lmax > 0.0);
    const SolveResult above =
        admm_solve(Y, inst.Z, inst.rho, tight_config(1.01 * lmax));
    CHECK(above.B_hat.entries().cwiseAbs().maxCoeff() == 0.0);
    CHECK(above.d_hat == 0);
    const SolveResult below =
        admm_solve(Y, inst.Z, inst.rho, tight_config(0.5 * lmax));
    CHECK(below.B_hat.entries().cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("objective matches an independent proximal-gradient solver") {
  for (int trial = 0; trial < 8; ++trial) {
    const auto inst = oracles::random_sbm_instance(400 + trial);
    const auto sample = sample_mono(inst.B, inst.Z, inst.rho, inst.L, 400 + trial);
    const AveragedAdjacency Y = average_layers(sample);
    const BlockTarget target = compress(Y, inst.Z);
    Rng rng(500 + trial);
    const double lmax = lambda_max(target, Scaling::per_node);
    const double lambda = lmax * std::pow(10.0, rng.uniform(-2.0, 0.0));

    AdmmConfig cfg = tight_config(lambda);
    const SolveResult res = admm_solve(target, inst.rho, cfg, nullptr);
    const oracles::IstaResult ista = oracles::ista_solve(
        Y.dense(), inst.Z.indicator(), lambda, 1.0 / inst.Z.n());
    CHECK(res.objective_value ==
          doctest::Approx(ista.objective).epsilon(1e-6));
  }
}

TEST_CASE("per-node and raw scalings give the same minimizer") {
  const auto inst = oracles::random_sbm_instance(611);
  const auto sample = sample_mono(inst.B, inst.Z, inst.rho, inst.L, 611);
  const BlockTarget target = compress(average_layers(sample), inst.Z);
  const double lmax = lambda_max(target, Scaling::per_node);
  const double lambda3 = 0.2 * lmax;

  const SolveResult per_node =
      admm_solve(target, inst.rho, tight_config(lambda3, Scaling::per_node), nullptr);
  const SolveResult raw = admm_solve(
      target, inst.rho, tight_config(lambda3 * inst.Z.n(), Scaling::raw), nullptr);
  CHECK((per_node.W_rho - raw.W_rho).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("iterates stay symmetric and primal-feasible at convergence") {
  const auto inst = oracles::random_sbm_instance(711);
  const auto sample = sample_mono(inst.B, inst.Z, inst.rho, inst.L, 711);
  const BlockTarget target = compress(average_layers(sample), inst.Z);
  AdmmConfig cfg = tight_config(0.1 * lambda_max(target, Scaling::per_node));
  cfg.epsilon = 1e-14;
  const SolveResult res = admm_solve(target, inst.rho, cfg, nullptr);
  REQUIRE(res.converged);
  const int K = inst.Z.K();
  CHECK((res.state.W - res.state.W.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((res.state.V - res.state.V.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((res.state.Theta - res.state.Theta.transpose()).cwiseAbs().maxCoeff() <
        1e-10);
  CHECK(res.state.primal_residual / K <= 10.0 * std::sqrt(cfg.epsilon));
}

TEST_CASE("converged solutions certify optimality under perturbations") {
  const auto inst = oracles::random_sbm_instance(801);
  const auto sample = sample_mono(inst.B, inst.Z, inst.rho, inst.L, 801);
  const BlockTarget target = compress(average_layers(sample), inst.Z);
  const double lambda = 0.15 * lambda_max(target, Scaling::per_node);
  const SolveResult res = admm_solve(target, inst.rho, tight_config(lambda), nullptr);
  REQUIRE(res.converged);
  Rng rng(802);
  const int K = inst.Z.K();
  for (int pert = 0; pert < 100; ++pert) {
    Eigen::MatrixXd P = oracles::random_symmetric(rng, K, -1.0, 1.0);
    P *= 1e-3 / P.norm();
    const double obj = penalized_objective(target, res.W_rho + P, lambda,
                                           Scaling::per_node);
    CHECK(obj >= res.objective_value - 1e-8);
  }
}

TEST_CASE("solve_path warm starts match cold solves") {
  const auto inst = oracles::random_sbm_instance(901);
  const auto sample = sample_mono(inst.B, inst.Z, inst.rho, inst.L, 901);
  const BlockTarget target = compress(average_layers(sample), inst.Z);
  const double lmax = lambda_max(target, Scaling::per_node);
  std::vector<double> lambdas;
  for (double f : {1e-3, 1e-2, 0.1, 0.3, 1.0}) lambdas.push_back(f * lmax);

  AdmmConfig cfg = tight_config(1.0);
  const auto path = solve_path(target, inst.rho, lambdas, cfg);
  REQUIRE(path.size() == lambdas.size());
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    cfg.lambda = lambdas[j];
    const SolveResult cold = admm_solve(target, inst.rho, cfg, nullptr);
    CHECK(path[j].objective_value ==
          doctest::Approx(cold.objective_value).epsilon(1e-5));
  }

  SUBCASE("single-element grid equals a direct solve") {
    cfg.lambda = lambdas[2];
    const auto single = solve_path(target, inst.rho, {lambdas[2]}, cfg);
    const SolveResult direct = admm_solve(target, inst.rho, cfg, nullptr);
    CHECK(single[0].objective_value == doctest::Approx(direct.objective_value));
    CHECK((single[0].W_rho - direct.W_rho).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("rank along a noiseless path is nonincreasing in lambda") {
  Rng rng(1001);
  const ConnectivityMatrix B(oracles::random_lowrank_probability(rng, 5, 3));
  const auto Z = MembershipMatrix::from_sizes({10, 8, 12, 9, 11});
  const AveragedAdjacency Y = noiseless_average(B, Z, 1.0);
  const BlockTarget target = compress(Y, Z);
  const double lmax = lambda_max(target, Scaling::per_node);
  std::vector<double> lambdas;
  for (double f : {1e-7, 1e-5, 1e-3, 1e-2, 0.1, 0.3, 0.7, 1.05}) {
    lambdas.push_back(f * lmax);
  }
  const auto path = solve_path(target, 1.0, lambdas, tight_config(1.0));
  int prev = 100;
  for (const auto& res : path) {
    CHECK(res.d_hat <= prev);
    prev = res.d_hat;
  }
  CHECK(path.back().d_hat == 0);
}

TEST_CASE("solver validation errors") {
  const auto Z = MembershipMatrix::from_sizes({2, 0, 3});
  Eigen::MatrixXd dense = Eigen::MatrixXd::Constant(5, 5, 0.2);
  const AveragedAdjacency Y = AveragedAdjacency::from_dense(dense);
  CHECK_THROWS_AS(admm_solve(Y, Z, 1.0, tight_config(0.5)), DataError);

  const auto Z_ok = MembershipMatrix::from_sizes({3, 2});
  AdmmConfig bad;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(admm_solve(Y, Z_ok, 1.0, bad), DataError);
  bad.lambda = 1.0;
  bad.rho1 = 0.0;
  CHECK_THROWS_AS(admm_solve(Y, Z_ok, 1.0, bad), DataError);
  CHECK_THROWS_AS(solve_path(compress(Y, Z_ok), 1.0, {0.3, 0.2}, tight_config(1.0)),
                  DataError);
  CHECK_THROWS_AS(solve_path(compress(Y, Z_ok), 1.0, {}, tight_config(1.0)),
                  DataError);
}
