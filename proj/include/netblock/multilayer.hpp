#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "netblock/admm.hpp"
#include "netblock/baselines.hpp"
#include "netblock/clustering.hpp"
#include "netblock/graph.hpp"
#include "netblock/tuning.hpp"
#include "netblock/types.hpp"

namespace netblock {

enum class LayerFeatureLevel { per_layer_B, per_layer_A };

/// Row l holds the vectorized upper triangle (diagonal included) of either
/// the single-layer averaging estimate B^(l) (L x K(K+1)/2) or the raw
/// adjacency A^(l) (L x n(n+1)/2).
Eigen::MatrixXd layer_features(const NetworkSample& sample,
                               const MembershipMatrix& Z, double rho,
                               LayerFeatureLevel level);

/// Singular values of the layer feature matrix. The per-layer-A variant goes
/// through the L x L Gram matrix of edge intersections, so the n(n+1)/2-wide
/// matrix is never materialized.
Eigen::VectorXd layer_feature_singular_values(const NetworkSample& sample,
                                              const MembershipMatrix* Z, double rho,
                                              LayerFeatureLevel level);

struct LayerGrouping {
  int L = 0;
  int L_tilde = 0;
  std::vector<int> group_of;            // 0-based group per layer
  std::vector<std::vector<int>> groups; // layer indices per group
};

LayerGrouping cluster_layers(const Eigen::MatrixXd& features, int L_tilde,
                             ClusterEngine engine, std::uint64_t seed,
                             int restarts = 10);

struct ScreeResult {
  int l_tilde = 0;
  Eigen::VectorXd singular_values;
};

/// Largest-gap elbow: the j maximizing sigma_j / sigma_{j+1}; an exactly
/// vanishing tail wins immediately.
ScreeResult estimate_l_tilde(const Eigen::MatrixXd& features, int max_candidates);
ScreeResult estimate_l_tilde_from_sigma(const Eigen::VectorXd& sigma,
                                        int max_candidates);

/// min over group permutations of the fraction of layers assigned to the
/// wrong group.
double between_layer_error(const LayerGrouping& grouping,
                           const std::vector<int>& truth);

struct GroupEstimate {
  SolveResult solve;
  double lambda = 0.0;
  bool no_cv = false;  // single-layer group estimated at a borrowed lambda
  std::vector<int> layers;
};

struct MultiOptions {
  std::optional<int> l_tilde;  // estimated from the scree elbow when absent
  int folds = 5;
  int grid_count = 50;
  double grid_floor = 1e-4;
  ClusterEngine engine = ClusterEngine::gmm;
  std::uint64_t seed = 0;
  int restarts = 10;
  AdmmConfig admm;
  std::optional<double> fixed_lambda;  // skips CV entirely when set
};

struct MultiResult {
  ClusterAssignment membership;
  LayerGrouping grouping;
  std::vector<GroupEstimate> groups;
  std::optional<double> between_layer_err;  // when ground-truth groups exist
  std::optional<int> estimated_l_tilde;     // when the elbow chose it
};

/// Two-stage estimation for heterogeneous layers: bias-adjusted spectral
/// clustering for memberships, layer grouping on per-layer estimates, then a
/// cross-validated penalized solve per group.
MultiResult multisbm_estimate(const NetworkSample& sample, int K,
                              const MultiOptions& opts);

struct ReestimateOptions {
  int folds = 5;
  int grid_count = 50;
  double grid_floor = 1e-4;
  std::uint64_t seed = 0;
  int restarts = 10;
  AdmmConfig admm;
};

struct ReestimateResult {
  ClusterAssignment initial;
  CvReport cv;  // penalized solve with the initial membership
  int d_hat = 0;
  bool reclustered = false;
  ClusterAssignment final_assignment;
  BaselineResult final_B;  // low-rank approximation at rank d_hat
};

/// Membership re-estimation loop: k-means at embedding dimension K, rank
/// estimate from the penalized solve, k-means again at the estimated
/// dimension, then the rank-d_hat low-rank approximation.
ReestimateResult reestimate_pipeline(const NetworkSample& sample, int K,
                                     const ReestimateOptions& opts);

}  // namespace netblock
