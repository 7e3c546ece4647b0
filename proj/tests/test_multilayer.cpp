#include <doctest.h>

#include <Eigen/Dense>

#include "netblock/errors.hpp"
#include "netblock/multilayer.hpp"
#include "netblock/sampler.hpp"
#include "support/oracles.hpp"

using namespace netblock;

namespace {

ConnectivityMatrix constant_B(double p) {
  Eigen::MatrixXd M(1, 1);
  M << p;
  return ConnectivityMatrix(M);
}

NetworkSample two_group_noiseless(int per_group) {
  // deterministic layers: group 1 empty graphs, group 2 complete graphs
  const auto Z = MembershipMatrix::from_sizes({6});
  const auto zeros = sample_mono(constant_B(0.0), Z, 1.0, per_group, 1);
  const auto ones = sample_mono(constant_B(1.0), Z, 1.0, per_group, 1);
  std::vector<BinaryLayer> layers;
  std::vector<int> groups;
  for (int l = 0; l < per_group; ++l) {
    layers.push_back(zeros.layers()[l]);
    groups.push_back(0);
  }
  for (int l = 0; l < per_group; ++l) {
    layers.push_back(ones.layers()[l]);
    groups.push_back(1);
  }
  return NetworkSample(layers, 1.0, groups);
}

}  // namespace

TEST_CASE("per-layer feature rows") {
  const auto Z = MembershipMatrix::from_sizes({4, 4});
  Rng rng(60);
  const ConnectivityMatrix B(oracles::random_lowrank_probability(rng, 2, 2));
  const auto sample = sample_mono(B, Z, 0.9, 3, 60);

  SUBCASE("K = 2 gives three upper-triangular entries per row") {
    const Eigen::MatrixXd G =
        layer_features(sample, Z, 0.9, LayerFeatureLevel::per_layer_B);
    CHECK(G.rows() == 3);
    CHECK(G.cols() == 3);  // (B11, B12, B22)
  }
  SUBCASE("identical layers give identical rows") {
    const NetworkSample twice({sample.layers()[0], sample.layers()[0]}, 0.9);
    const Eigen::MatrixXd G =
        layer_features(twice, Z, 0.9, LayerFeatureLevel::per_layer_B);
    CHECK((G.row(0) - G.row(1)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
  SUBCASE("adjacency-level rows vectorize the upper triangle") {
    const Eigen::MatrixXd G =
        layer_features(sample, Z, 0.9, LayerFeatureLevel::per_layer_A);
    CHECK(G.rows() == 3);
    CHECK(G.cols() == 8 * 9 / 2);
    CHECK(G.row(0).sum() ==
          doctest::Approx(static_cast<double>(sample.layers()[0].edge_count())));
  }
}

TEST_CASE("noiseless groups give exactly two distinct feature rows") {
  const auto sample = two_group_noiseless(3);
  const auto Z = MembershipMatrix::from_sizes({6});
  const Eigen::MatrixXd G =
      layer_features(sample, Z, 1.0, LayerFeatureLevel::per_layer_B);
  for (int l = 1; l < 3; ++l)
    CHECK((G.row(l) - G.row(0)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  for (int l = 4; l < 6; ++l)
    CHECK((G.row(l) - G.row(3)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((G.row(0) - G.row(3)).cwiseAbs().maxCoeff() > 0.5);
}

TEST_CASE("layer clustering") {
  const auto sample = two_group_noiseless(4);
  const auto Z = MembershipMatrix::from_sizes({6});
  const Eigen::MatrixXd G =
      layer_features(sample, Z, 1.0, LayerFeatureLevel::per_layer_B);

  SUBCASE("separated constants split perfectly") {
    const LayerGrouping grouping = cluster_layers(G, 2, ClusterEngine::kmeans, 3);
    CHECK(between_layer_error(grouping, *sample.group_labels()) ==
          doctest::Approx(0.0));
  }
  SUBCASE("a single group holds every layer") {
    const LayerGrouping grouping = cluster_layers(G, 1, ClusterEngine::gmm, 3);
    CHECK(grouping.groups[0].size() == 8);
  }
  SUBCASE("group count out of range") {
    CHECK_THROWS_AS(cluster_layers(G, 9, ClusterEngine::kmeans, 3), DataError);
  }
}

TEST_CASE("scree elbow estimates the number of distinct rows") {
  SUBCASE("three distinct rows, noiseless") {
    Rng rng(61);
    Eigen::MatrixXd distinct(3, 5);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 5; ++j) distinct(i, j) = rng.uniform(0.0, 1.0);
    Eigen::MatrixXd G(9, 5);
    for (int l = 0; l < 9; ++l) G.row(l) = distinct.row(l % 3);
    const ScreeResult res = estimate_l_tilde(G, 8);
    CHECK(res.l_tilde == 3);
    CHECK(res.singular_values(3) <= 1e-10 * res.singular_values(0));
  }
  SUBCASE("one repeated row") {
    Eigen::MatrixXd G = Eigen::MatrixXd::Ones(6, 4);
    CHECK(estimate_l_tilde(G, 5).l_tilde == 1);
  }
  SUBCASE("random rank construction") {
    Rng rng(62);
    for (int trial = 0; trial < 10; ++trial) {
      const int r = 1 + static_cast<int>(rng.uniform_below(4));
      Eigen::MatrixXd distinct(r, 6);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < 6; ++j) distinct(i, j) = rng.uniform(0.5, 2.0);
      Eigen::MatrixXd G(12, 6);
      for (int l = 0; l < 12; ++l) G.row(l) = distinct.row(l % r);
      // generic random rows are linearly independent
      CHECK(estimate_l_tilde(G, 6).l_tilde == r);
    }
  }
  SUBCASE("all-zero features are rejected") {
    CHECK_THROWS_AS(estimate_l_tilde(Eigen::MatrixXd::Zero(4, 3), 3), DataError);
  }
}

TEST_CASE("between-layer error") {
  LayerGrouping g;
  g.L = 10;
  g.L_tilde = 2;
  g.group_of = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  g.groups = {{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}};
  const std::vector<int> truth{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  CHECK(between_layer_error(g, truth) == doctest::Approx(0.0));

  LayerGrouping swapped = g;
  swapped.group_of[3] = 1;
  swapped.groups = {{0, 1, 2, 4}, {3, 5, 6, 7, 8, 9}};
  CHECK(between_layer_error(swapped, truth) == doctest::Approx(0.1));

  LayerGrouping inverted = g;
  for (int& x : inverted.group_of) x = 1 - x;
  std::swap(inverted.groups[0], inverted.groups[1]);
  CHECK(between_layer_error(inverted, truth) == doctest::Approx(0.0));

  const std::vector<int> three_groups{0, 0, 0, 0, 0, 1, 1, 1, 2, 2};
  CHECK_THROWS_AS(between_layer_error(g, three_groups), DataError);
}

TEST_CASE("multilayer estimation with a single group reduces to one estimate") {
  Rng rng(63);
  const ConnectivityMatrix B(oracles::random_lowrank_probability(rng, 2, 1));
  const auto Z = MembershipMatrix::from_sizes({25, 25});
  const auto sample = sample_mono(B, Z, 0.9, 8, 63);

  MultiOptions opts;
  opts.l_tilde = 1;
  opts.folds = 4;
  opts.grid_count = 15;
  opts.seed = 5;
  opts.admm.epsilon = 1e-13;
  opts.admm.max_iters = 50000;
  const MultiResult res = multisbm_estimate(sample, 2, opts);
  REQUIRE(res.groups.size() == 1);
  CHECK(res.groups[0].layers.size() == 8);
  CHECK_FALSE(res.groups[0].no_cv);
  // membership is only identified up to relabeling; compare via alignment
  const AlignmentResult align =
      align_labels(res.membership.labels, Z.labels(), 2);
  CHECK(align.misclustering_rate == doctest::Approx(0.0));
  Eigen::MatrixXd aligned(2, 2);
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l)
      aligned(align.permutation[k], align.permutation[l]) =
          res.groups[0].solve.B_hat.entries()(k, l);
  CHECK((aligned - B.entries()).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("two-stage estimation separates heterogeneous groups") {
  // strongly separated two-community, two-group construction
  Eigen::MatrixXd B1m(2, 2), B2m(2, 2);
  B1m << 0.8, 0.1, 0.1, 0.7;
  B2m << 0.2, 0.5, 0.5, 0.15;
  const ConnectivityMatrix B1(B1m), B2(B2m);
  const auto Z = MembershipMatrix::from_sizes({30, 30});
  const auto sample = sample_multi({B1, B2}, Z, 0.9, {6, 6}, 64);

  MultiOptions opts;
  opts.l_tilde = 2;
  opts.folds = 3;
  opts.grid_count = 12;
  opts.seed = 6;
  opts.admm.epsilon = 1e-13;
  opts.admm.max_iters = 50000;
  const MultiResult res = multisbm_estimate(sample, 2, opts);
  REQUIRE(res.between_layer_err.has_value());
  CHECK(*res.between_layer_err == doctest::Approx(0.0));

  SUBCASE("scree-estimated group count matches") {
    MultiOptions auto_opts = opts;
    auto_opts.l_tilde.reset();
    const MultiResult auto_res = multisbm_estimate(sample, 2, auto_opts);
    CHECK(auto_res.estimated_l_tilde.has_value());
    CHECK(auto_res.grouping.L_tilde == 2);
  }
}

TEST_CASE("single-layer groups borrow the median selected lambda") {
  Eigen::MatrixXd B1m(1, 1), B2m(1, 1);
  B1m << 0.15;
  B2m << 0.85;
  const auto Z = MembershipMatrix::from_sizes({40});
  const auto sample =
      sample_multi({ConnectivityMatrix(B1m), ConnectivityMatrix(B2m)}, Z, 1.0,
                   {7, 1}, 65);
  MultiOptions opts;
  opts.l_tilde = 2;
  opts.folds = 3;
  opts.grid_count = 10;
  opts.seed = 9;
  const MultiResult res = multisbm_estimate(sample, 1, opts);
  int singles = 0;
  for (const auto& est : res.groups) {
    if (est.layers.size() == 1) {
      CHECK(est.no_cv);
      ++singles;
    } else {
      CHECK_FALSE(est.no_cv);
    }
  }
  CHECK(singles == 1);
}

TEST_CASE("re-estimation keeps the initial clustering when d equals K") {
  Rng rng(66);
  const ConnectivityMatrix B(oracles::random_lowrank_probability(rng, 2, 2));
  const auto Z = MembershipMatrix::from_sizes({30, 30});
  const auto sample = sample_mono(B, Z, 1.0, 20, 66);
  ReestimateOptions opts;
  opts.folds = 4;
  opts.grid_count = 15;
  opts.seed = 3;
  const ReestimateResult res = reestimate_pipeline(sample, 2, opts);
  CHECK(res.d_hat == 2);  // dense full-rank data keeps both directions
  CHECK_FALSE(res.reclustered);
  CHECK(res.final_assignment.labels == res.initial.labels);
  CHECK(res.final_B.method == "avg_lowrank");
  CHECK_THROWS_AS(
      reestimate_pipeline(NetworkSample({sample.layers()[0]}, 1.0), 2, opts),
      DataError);
}
