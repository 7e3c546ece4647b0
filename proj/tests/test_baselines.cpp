#include <doctest.h>

#include <Eigen/Dense>
#include <numeric>

#include "netblock/baselines.hpp"
#include "netblock/errors.hpp"
#include "netblock/numerics.hpp"
#include "netblock/sampler.hpp"
#include "support/oracles.hpp"

using namespace netblock;

namespace {

AveragedAdjacency from_dense(const Eigen::MatrixXd& M) {
  return AveragedAdjacency::from_dense(M);
}

// Best rank-d approximation by exhaustive search over eigenpair subsets.
Eigen::MatrixXd best_subset_truncation(const Eigen::MatrixXd& M, int d) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  const int K = static_cast<int>(M.rows());
  std::vector<int> idx(K);
  std::iota(idx.begin(), idx.end(), 0);
  Eigen::MatrixXd best;
  double best_err = std::numeric_limits<double>::infinity();
  std::vector<int> pick(d);
  std::function<void(int, int)> rec = [&](int start, int chosen) {
    if (chosen == d) {
      Eigen::MatrixXd R = Eigen::MatrixXd::Zero(K, K);
      for (int c = 0; c < d; ++c) {
        const int j = pick[c];
        R += es.eigenvalues()(j) * es.eigenvectors().col(j) *
             es.eigenvectors().col(j).transpose();
      }
      const double err = (R - M).norm();
      if (err < best_err) {
        best_err = err;
        best = R;
      }
      return;
    }
    for (int j = start; j < K; ++j) {
      pick[chosen] = j;
      rec(j + 1, chosen + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("averaging estimator block means") {
  SUBCASE("hand-computed 4 x 4 case") {
    Eigen::MatrixXd A(4, 4);
    A << 0, 1, 1, 0,
         1, 0, 0, 1,
         1, 0, 0, 1,
         0, 1, 1, 0;
    const auto Z = MembershipMatrix::from_sizes({2, 2});
    const BaselineResult res = averaging_estimator(from_dense(A), Z, 1.0);
    CHECK(res.B_hat.entries().isApprox(Eigen::MatrixXd::Constant(2, 2, 0.5)));
  }
  SUBCASE("noiseless input returns B exactly") {
    Rng rng(30);
    const ConnectivityMatrix B(oracles::random_lowrank_probability(rng, 3, 3));
    const auto Z = MembershipMatrix::from_sizes({4, 6, 5});
    const auto Y = from_dense(expected_adjacency(B, Z, 1.0));
    CHECK((averaging_estimator(Y, Z, 1.0).B_hat.entries() - B.entries())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
  SUBCASE("diagonal-block denominator includes diagonal cells") {
    Eigen::MatrixXd A(2, 2);
    A << 0, 1, 1, 0;
    const auto Z = MembershipMatrix::from_sizes({2});
    const BaselineResult res = averaging_estimator(from_dense(A), Z, 1.0);
    CHECK(res.B_hat.entries()(0, 0) == doctest::Approx(0.5));  // 2 / 4
    const BaselineResult no_diag =
        averaging_estimator(from_dense(A), Z, 1.0, false);
    CHECK(no_diag.B_hat.entries()(0, 0) == doctest::Approx(1.0));  // 2 / 2
  }
  SUBCASE("errors") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Constant(3, 3, 0.4);
    const auto Z = MembershipMatrix(std::vector<int>{0, 0, 0}, 2);
    CHECK_THROWS_AS(averaging_estimator(from_dense(A), Z, 1.0), DataError);
    const auto Z_ok = MembershipMatrix::from_sizes({2, 1});
    CHECK_THROWS_AS(averaging_estimator(from_dense(A), Z_ok, 0.0), DataError);
  }
}

TEST_CASE("low-rank truncation of the averaging estimate") {
  Rng rng(31);
  const auto Z = MembershipMatrix::from_sizes({8, 7, 9, 6});
  const ConnectivityMatrix B(oracles::random_lowrank_probability(rng, 4, 4));
  const auto sample = sample_mono(B, Z, 0.9, 4, 31);
  const AveragedAdjacency Y = average_layers(sample);
  const BaselineResult avg = averaging_estimator(Y, Z, 0.9);

  SUBCASE("full rank equals the averaging estimate") {
    const BaselineResult full = avg_lowrank(Y, Z, 0.9, 4);
    CHECK((full.B_hat.entries() - avg.B_hat.entries()).cwiseAbs().maxCoeff() <
          1e-10);
  }
  SUBCASE("a rank-one matrix is unchanged at d = 1") {
    Eigen::VectorXd u(2);
    u << 0.6, 0.3;
    const Eigen::MatrixXd B1 = u * u.transpose();
    const auto Z2 = MembershipMatrix::from_sizes({3, 3});
    const auto noiseless =
        from_dense(expected_adjacency(ConnectivityMatrix(B1), Z2, 1.0));
    const BaselineResult res = avg_lowrank(noiseless, Z2, 1.0, 1);
    CHECK((res.B_hat.entries() - B1).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(res.d_hat == 1);
  }
  SUBCASE("matches the exhaustive eigen-subset truncation") {
    for (int d = 1; d <= 4; ++d) {
      const BaselineResult res = avg_lowrank(Y, Z, 0.9, d);
      const Eigen::MatrixXd oracle =
          best_subset_truncation(avg.B_hat.entries(), d);
      CHECK((res.B_hat.entries() - oracle).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
  SUBCASE("truncation error is nondecreasing as d decreases") {
    double prev = -1.0;
    for (int d = 4; d >= 1; --d) {
      const double err =
          (avg_lowrank(Y, Z, 0.9, d).B_hat.entries() - avg.B_hat.entries()).norm();
      CHECK(err >= prev - 1e-12);
      prev = err;
    }
  }
  SUBCASE("rank bounds are enforced") {
    CHECK_THROWS_AS(avg_lowrank(Y, Z, 0.9, 0), DataError);
    CHECK_THROWS_AS(avg_lowrank(Y, Z, 0.9, 5), DataError);
  }
}

TEST_CASE("spectral embedding estimator") {
  Rng rng(32);
  const auto Z = MembershipMatrix::from_sizes({7, 8, 6});
  const ConnectivityMatrix B(oracles::random_lowrank_probability(rng, 3, 2));
  SUBCASE("full truncation equals plain averaging") {
    const auto sample = sample_mono(B, Z, 0.8, 2, 32);
    const AveragedAdjacency Y = average_layers(sample);
    const BaselineResult se = spectral_embedding_estimator(Y, Z, 0.8, Y.n());
    const BaselineResult avg = averaging_estimator(Y, Z, 0.8);
    CHECK((se.B_hat.entries() - avg.B_hat.entries()).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("rank-d noiseless input is recovered at r = d") {
    const auto Y = from_dense(expected_adjacency(B, Z, 1.0));
    const BaselineResult se = spectral_embedding_estimator(Y, Z, 1.0, 2);
    CHECK((se.B_hat.entries() - B.entries()).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("rank bounds") {
    const auto Y = from_dense(expected_adjacency(B, Z, 1.0));
    CHECK_THROWS_AS(spectral_embedding_estimator(Y, Z, 1.0, 0), DataError);
    CHECK_THROWS_AS(spectral_embedding_estimator(Y, Z, 1.0, Y.n() + 1), DataError);
  }
}

TEST_CASE("averaging is equivariant under community relabeling") {
  Rng rng(33);
  const auto Z = MembershipMatrix::from_sizes({5, 6, 4});
  const ConnectivityMatrix B(oracles::random_lowrank_probability(rng, 3, 3));
  const auto sample = sample_mono(B, Z, 0.7, 3, 33);
  const AveragedAdjacency Y = average_layers(sample);
  const BaselineResult base = averaging_estimator(Y, Z, 0.7);

  const std::vector<int> perm{2, 0, 1};
  std::vector<int> relabeled(Z.n());
  for (int i = 0; i < Z.n(); ++i) relabeled[i] = perm[Z.labels()[i]];
  const MembershipMatrix Zp(relabeled, 3);
  const BaselineResult permuted = averaging_estimator(Y, Zp, 0.7);
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l)
      CHECK(permuted.B_hat.entries()(perm[k], perm[l]) ==
            doctest::Approx(base.B_hat.entries()(k, l)));
}

TEST_CASE("all baselines coincide on noiseless full-information input") {
  Rng rng(34);
  const auto Z = MembershipMatrix::from_sizes({6, 5, 7});
  const ConnectivityMatrix B(oracles::random_lowrank_probability(rng, 3, 3));
  const auto Y = from_dense(expected_adjacency(B, Z, 1.0));
  const Eigen::MatrixXd avg = averaging_estimator(Y, Z, 1.0).B_hat.entries();
  const Eigen::MatrixXd lr = avg_lowrank(Y, Z, 1.0, 3).B_hat.entries();
  const Eigen::MatrixXd se =
      spectral_embedding_estimator(Y, Z, 1.0, Y.n()).B_hat.entries();
  CHECK((avg - lr).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((avg - se).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((avg - B.entries()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rank selection by cross-validation favors the true rank") {
  Rng rng(35);
  const auto Z = MembershipMatrix::from_sizes({20, 25, 22, 18});
  const ConnectivityMatrix B(oracles::random_lowrank_probability(rng, 4, 2));
  const auto sample = sample_mono(B, Z, 1.0, 40, 35);
  const CvPlan plan = mfold_plan(sample.L(), 4, 99);
  const RankCvResult res = avg_lowrank_rank_cv(sample, Z, plan);
  CHECK(res.d >= 2);
  CHECK(res.d <= 3);
  CHECK(res.total_loss.size() == 4);
}
