#include <doctest.h>

#include <Eigen/Dense>

#include "netblock/errors.hpp"
#include "netblock/sampler.hpp"
#include "support/oracles.hpp"

using namespace netblock;

namespace {

ConnectivityMatrix make_B(std::initializer_list<std::initializer_list<double>> rows) {
  const int K = static_cast<int>(rows.size());
  Eigen::MatrixXd M(K, K);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) M(i, j++) = v;
    ++i;
  }
  return ConnectivityMatrix(M);
}

Eigen::MatrixXd block_density(const BinaryLayer& layer, const MembershipMatrix& Z) {
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(Z.K(), Z.K());
  Eigen::MatrixXd cells = Eigen::MatrixXd::Zero(Z.K(), Z.K());
  const auto& g = Z.labels();
  for (int i = 0; i < layer.n(); ++i)
    for (int j = i; j < layer.n(); ++j) cells(g[i], g[j]) += 1.0;
  for (const Edge& e : layer.edges()) counts(g[e.i], g[e.j]) += 1.0;
  Eigen::MatrixXd density(Z.K(), Z.K());
  for (int k = 0; k < Z.K(); ++k)
    for (int l = 0; l < Z.K(); ++l) {
      const double c = cells(k, l) + (k == l ? 0.0 : cells(l, k));
      const double m = counts(k, l) + (k == l ? 0.0 : counts(l, k));
      density(k, l) = m / c;
    }
  return density;
}

}  // namespace

TEST_CASE("probability-one edges fill the matrix including the diagonal") {
  const auto Z = MembershipMatrix::from_sizes({3});
  const auto sample = sample_mono(make_B({{1.0}}), Z, 1.0, 1, 9);
  CHECK(sample.layers()[0].edge_count() == 6);  // all (i,j), i <= j, n = 3
  CHECK(sample.layers()[0].dense().isApprox(Eigen::MatrixXd::Ones(3, 3)));
}

TEST_CASE("probability-zero edges give empty layers") {
  const auto Z = MembershipMatrix::from_sizes({4, 3});
  const auto sample = sample_mono(make_B({{0.0, 0.0}, {0.0, 0.0}}), Z, 0.7, 3, 5);
  for (const auto& layer : sample.layers()) CHECK(layer.edge_count() == 0);
}

TEST_CASE("empirical block densities track B at n = 2000") {
  const auto B = make_B({{0.5, 0.2}, {0.2, 0.7}});
  const auto Z = MembershipMatrix::from_sizes({1000, 1000});
  const auto sample = sample_mono(B, Z, 1.0, 1, 1234);
  const Eigen::MatrixXd density = block_density(sample.layers()[0], Z);
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l)
      CHECK(std::abs(density(k, l) - B.entries()(k, l)) < 0.03);
}

TEST_CASE("single-group multilayer sampling equals the mono sampler") {
  const auto B = make_B({{0.4, 0.1}, {0.1, 0.6}});
  const auto Z = MembershipMatrix::from_sizes({12, 10});
  const auto mono = sample_mono(B, Z, 0.8, 4, 77);
  const auto multi = sample_multi({B}, Z, 0.8, {4}, 77);
  REQUIRE(multi.group_labels().has_value());
  for (int l = 0; l < 4; ++l) {
    CHECK(multi.layers()[l] == mono.layers()[l]);
    CHECK((*multi.group_labels())[l] == 0);
  }
}

TEST_CASE("two one-layer groups at p = 0 and p = 1") {
  const auto Z = MembershipMatrix::from_sizes({5});
  const auto sample =
      sample_multi({make_B({{0.0}}), make_B({{1.0}})}, Z, 1.0, {1, 1}, 3);
  CHECK(sample.layers()[0].edge_count() == 0);
  CHECK(sample.layers()[1].edge_count() == 15);
}

TEST_CASE("four-group suite block densities match rho * B per group") {
  const double h = 0.5, s = std::sqrt(2.0) / 2.0;
  Eigen::MatrixXd U(3, 3);
  U << h, h, -s, h, h, s, s, -s, 0.0;
  auto suite_B = [&](double a, double b, double c) {
    Eigen::Vector3d diag(a, b, c);
    return ConnectivityMatrix::symmetrized(U * diag.asDiagonal() * U.transpose());
  };
  std::vector<ConnectivityMatrix> Bs{suite_B(1.2, 0.6, -0.7), suite_B(1.2, 0.6, 0.7),
                                     suite_B(1.7, 0.0, -0.6)};
  Eigen::Vector3d u(0.8, 0.64, 0.512);
  Bs.push_back(ConnectivityMatrix::symmetrized(u * u.transpose()));

  const auto Z = MembershipMatrix::from_sizes({125, 125, 250});
  const double rho = 0.4;  // dense enough for tight frequencies
  const auto sample = sample_multi(Bs, Z, rho, {6, 6, 6, 6}, 2024);
  for (int g = 0; g < 4; ++g) {
    Eigen::MatrixXd mean_density = Eigen::MatrixXd::Zero(3, 3);
    for (int l = 0; l < sample.L(); ++l) {
      if ((*sample.group_labels())[l] != g) continue;
      mean_density += block_density(sample.layers()[l], Z);
    }
    mean_density /= 6.0;
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        CHECK(std::abs(mean_density(k, l) - rho * Bs[g].entries()(k, l)) < 0.05);
  }
}

TEST_CASE("expected adjacency is rho Z B Z^T") {
  const auto B = make_B({{0.5, 0.2}, {0.2, 0.7}});
  SUBCASE("identity assignment returns B itself") {
    const auto Z = MembershipMatrix::from_sizes({1, 1});
    CHECK(expected_adjacency(B, Z, 1.0).isApprox(B.entries()));
  }
  SUBCASE("rho = 0 gives the zero matrix") {
    const auto Z = MembershipMatrix::from_sizes({3, 2});
    CHECK(expected_adjacency(B, Z, 0.0).isZero());
  }
  SUBCASE("block-constant structure") {
    const auto Z = MembershipMatrix::from_sizes({2, 2});
    const Eigen::MatrixXd E = expected_adjacency(B, Z, 1.0);
    Eigen::MatrixXd expected(4, 4);
    expected << 0.5, 0.5, 0.2, 0.2,
                0.5, 0.5, 0.2, 0.2,
                0.2, 0.2, 0.7, 0.7,
                0.2, 0.2, 0.7, 0.7;
    CHECK(E.isApprox(expected));
  }
  SUBCASE("rank is at most rank(B)") {
    const auto Z = MembershipMatrix::from_sizes({5, 7});
    const Eigen::MatrixXd E = expected_adjacency(B, Z, 0.3);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(E);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > 1e-10 * svd.singularValues()(0)) ++rank;
    CHECK(rank <= 2);
  }
}

TEST_CASE("layer averaging") {
  const auto Z = MembershipMatrix::from_sizes({4, 4});
  SUBCASE("single layer averages to itself") {
    const auto sample = sample_mono(make_B({{0.6, 0.3}, {0.3, 0.6}}), Z, 1.0, 1, 4);
    CHECK(average_layers(sample).dense().isApprox(sample.layers()[0].dense()));
  }
  SUBCASE("all-zero and all-one layers average to one half") {
    const auto Z1 = MembershipMatrix::from_sizes({4});
    const auto zeros = sample_mono(make_B({{0.0}}), Z1, 1.0, 1, 1);
    const auto ones = sample_mono(make_B({{1.0}}), Z1, 1.0, 1, 1);
    const NetworkSample both({zeros.layers()[0], ones.layers()[0]}, 1.0);
    CHECK(average_layers(both).dense().isApprox(Eigen::MatrixXd::Constant(4, 4, 0.5)));
  }
  SUBCASE("matches the dense per-entry mean") {
    const auto sample = sample_mono(make_B({{0.5, 0.3}, {0.3, 0.4}}), Z, 0.9, 3, 11);
    Eigen::MatrixXd direct = Eigen::MatrixXd::Zero(8, 8);
    for (const auto& layer : sample.layers()) direct += layer.dense();
    direct /= 3.0;
    CHECK(average_layers(sample).dense().isApprox(direct));
    CHECK(average_layers(sample, std::vector<int>{1})
              .dense()
              .isApprox(sample.layers()[1].dense()));
  }
  SUBCASE("empty subset is rejected") {
    const auto sample = sample_mono(make_B({{0.5, 0.3}, {0.3, 0.4}}), Z, 0.9, 3, 11);
    CHECK_THROWS_AS(average_layers(sample, std::vector<int>{}), DataError);
  }
}

TEST_CASE("sampled layers are symmetric, binary and seed-reproducible") {
  const auto B = make_B({{0.5, 0.2}, {0.2, 0.7}});
  const auto Z = MembershipMatrix::from_sizes({9, 8});
  const auto a = sample_mono(B, Z, 0.6, 5, 99);
  const auto b = sample_mono(B, Z, 0.6, 5, 99);
  for (int l = 0; l < 5; ++l) {
    CHECK(a.layers()[l] == b.layers()[l]);
    const Eigen::MatrixXd D = a.layers()[l].dense();
    CHECK(D.isApprox(D.transpose()));
    CHECK(((D.array() == 0.0) || (D.array() == 1.0)).all());
  }
}

TEST_CASE("entry frequencies converge to rho * B over many layers") {
  const auto B = make_B({{0.5, 0.2}, {0.2, 0.7}});
  const auto Z = MembershipMatrix::from_sizes({6, 6});
  const double rho = 0.8;
  const auto sample = sample_mono(B, Z, rho, 2000, 31);
  const Eigen::MatrixXd mean = average_layers(sample).dense();
  const Eigen::MatrixXd expected = expected_adjacency(B, Z, rho);
  CHECK((mean - expected).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("no-self-loops flag zeroes the diagonal") {
  const auto Z = MembershipMatrix::from_sizes({6});
  SampleOptions opts;
  opts.self_loops = false;
  const auto sample = sample_mono(make_B({{1.0}}), Z, 1.0, 1, 2, opts);
  CHECK(sample.layers()[0].dense().diagonal().isZero());
  CHECK(sample.layers()[0].edge_count() == 15);
}

TEST_CASE("sampler input validation") {
  const auto B2 = make_B({{0.5, 0.2}, {0.2, 0.7}});
  const auto Z3 = MembershipMatrix::from_sizes({2, 2, 2});
  CHECK_THROWS_AS(sample_mono(B2, Z3, 0.5, 1, 0), DataError);
  const auto Z2 = MembershipMatrix::from_sizes({2, 2});
  CHECK_THROWS_AS(sample_mono(B2, Z2, 0.0, 1, 0), DataError);
  CHECK_THROWS_AS(sample_mono(B2, Z2, 1.5, 1, 0), DataError);
  CHECK_THROWS_AS(sample_multi({B2, make_B({{0.1}})}, Z2, 0.5, {1, 1}, 0), DataError);
}
