#pragma once

#include <cstdint>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netblock/admm.hpp"
#include "netblock/types.hpp"

namespace netblock {

enum class Scenario {
  mono_known_z,      // memberships given
  mono_estimated_z,  // spectral + GMM memberships
  reestimate,        // membership re-estimation loop
  multi,             // two-stage multilayer pipeline
  truncation         // spectral-truncation sweep (single layer)
};

struct BSpec {
  enum class Kind { explicit_matrix, rank1_geometric, uniform_rank, multi_suite };
  Kind kind = Kind::rank1_geometric;
  Eigen::MatrixXd matrix;    // explicit_matrix
  double geometric_p = 0.9;  // u = (p, p^2, ..., p^K), B = u u^T
  int rank = 1;              // mean of `rank` random rank-one factors
};

struct ExperimentConfig {
  std::string name;
  Scenario scenario = Scenario::mono_known_z;
  int n = 0;
  int K = 0;
  int L = 0;
  double rho = 0.0;
  int replicates = 0;
  std::uint64_t seed = 1;
  BSpec b;
  std::vector<double> community_fractions;  // empty = balanced
  std::vector<int> layers_per_group;        // multi scenario
  int grid_count = 50;
  double grid_floor = 1e-4;
  int folds = 5;
  int restarts = 10;
  AdmmConfig admm;
  bool self_loops = true;
  bool spectral_columns = true;       // spectral-embedding baselines (dense eig)
  std::vector<int> truncation_ranks;  // truncation scenario
};

/// Named desk-scale presets: mono-known, mono-estimated, reestimate, multi,
/// trunc-dense, trunc-sparse. paper_scale switches to the full-size runs.
ExperimentConfig preset(const std::string& name, bool paper_scale = false);
std::vector<std::string> preset_names();

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct ReplicateRow {
  int replicate = 0;
  bool failed = false;
  std::string error;
  std::map<std::string, double> metrics;
};

struct MetricAggregate {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample std / sqrt(count)
  int count = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReplicateRow> rows;
  std::map<std::string, MetricAggregate> aggregates;
  int failures = 0;
};

/// Runs the configured scenario over independent replicates (replicate r
/// uses seed + r), records per-replicate metrics, and aggregates mean and
/// standard error over the successful replicates. Failed replicates are
/// recorded and excluded from the aggregates.
ExperimentReport run_experiment(const ExperimentConfig& config);

nlohmann::json report_json(const ExperimentReport& report);

struct TruncationSweep {
  std::vector<int> r_values;
  std::vector<double> mean_relative_error;
  std::vector<int> argmin_rank;       // per replicate
  Eigen::MatrixXd relative_errors;    // replicates x ranks
  int failures = 0;
};

/// Relative error of the spectral-embedding estimator as a function of the
/// truncation rank, averaged over replicates of a single-layer sample.
TruncationSweep sweep_truncation(const ExperimentConfig& config,
                                 const std::vector<int>& r_values);

nlohmann::json sweep_json(const ExperimentConfig& config, const TruncationSweep& sweep);

/// Membership matrix built from the configured community fractions.
MembershipMatrix config_membership(const ExperimentConfig& config);

/// True connectivity matrices for the configured B spec (one per layer
/// group; a single entry outside the multi scenario). Randomized specs draw
/// from the given seed.
std::vector<ConnectivityMatrix> config_connectivity(const ExperimentConfig& config,
                                                    std::uint64_t seed);

}  // namespace netblock
