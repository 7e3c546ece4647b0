#include "netblock/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "netblock/baselines.hpp"
#include "netblock/clustering.hpp"
#include "netblock/errors.hpp"
#include "netblock/multilayer.hpp"
#include "netblock/numerics.hpp"
#include "netblock/parallel.hpp"
#include "netblock/rng.hpp"
#include "netblock/sampler.hpp"
#include "netblock/tuning.hpp"

namespace netblock {

using nlohmann::json;

namespace {

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::mono_known_z: return "mono-known-z";
    case Scenario::mono_estimated_z: return "mono-estimated-z";
    case Scenario::reestimate: return "reestimate";
    case Scenario::multi: return "multi";
    case Scenario::truncation: return "truncation";
  }
  throw DataError("unknown scenario");
}

Scenario scenario_from_name(const std::string& name) {
  for (Scenario s : {Scenario::mono_known_z, Scenario::mono_estimated_z,
                     Scenario::reestimate, Scenario::multi, Scenario::truncation}) {
    if (scenario_name(s) == name) return s;
  }
  throw DataError("unknown scenario '" + name + "'");
}

std::vector<int> sizes_from_fractions(const std::vector<double>& fractions, int n) {
  std::vector<int> sizes(fractions.size());
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    if (fractions[k] <= 0.0) throw DataError("config: fractions must be positive");
    const double exact = fractions[k] * n;
    sizes[k] = static_cast<int>(std::floor(exact));
    assigned += sizes[k];
    remainders.push_back({exact - sizes[k], static_cast<int>(k)});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  int leftover = n - assigned;
  if (leftover < 0 || leftover > static_cast<int>(fractions.size()))
    throw DataError("config: community fractions must sum to 1");
  for (int i = 0; i < leftover; ++i) ++sizes[remainders[i].second];
  for (int s : sizes)
    if (s < 1) throw DataError("config: a community has no nodes at this n");
  return sizes;
}

// Connectivity matrices of the four-group heterogeneous suite: three share
// an eigenbasis with spectra (1.2, 0.6, -0.7), (1.2, 0.6, 0.7), (1.7, 0,
// -0.6); the fourth is the rank-one u u^T with u = (0.8, 0.64, 0.512).
std::vector<ConnectivityMatrix> multi_suite() {
  const double h = 0.5;
  const double s = std::sqrt(2.0) / 2.0;
  Eigen::MatrixXd U(3, 3);
  U << h, h, -s,
       h, h, s,
       s, -s, 0.0;
  auto make = [&](double a, double b, double c) {
    Eigen::Vector3d diag(a, b, c);
    return ConnectivityMatrix::symmetrized(U * diag.asDiagonal() * U.transpose());
  };
  std::vector<ConnectivityMatrix> Bs;
  Bs.push_back(make(1.2, 0.6, -0.7));
  Bs.push_back(make(1.2, 0.6, 0.7));
  Bs.push_back(make(1.7, 0.0, -0.6));
  Eigen::Vector3d u(0.8, 0.8 * 0.8, 0.8 * 0.8 * 0.8);
  Bs.push_back(ConnectivityMatrix::symmetrized(u * u.transpose()));
  return Bs;
}

double frob_error(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth) {
  return (estimate - truth).norm();
}

Eigen::MatrixXd permute_blocks(const Eigen::MatrixXd& B, const std::vector<int>& perm) {
  const int K = static_cast<int>(B.rows());
  Eigen::MatrixXd out(K, K);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) out(perm[k], perm[l]) = B(k, l);
  return out;
}

std::string metric_group_key(const std::string& base, int group) {
  return base + "_g" + std::to_string(group + 1);
}

void check_config(const ExperimentConfig& config) {
  if (config.n < 2 || config.K < 1 || config.replicates < 1)
    throw DataError("config: n, K and replicates must be positive");
  if (config.scenario != Scenario::multi && config.L < 1)
    throw DataError("config: L must be positive");
  if (!(config.rho > 0.0 && config.rho <= 1.0))
    throw DataError("config: rho must lie in (0,1]");
  if (!config.community_fractions.empty() &&
      static_cast<int>(config.community_fractions.size()) != config.K)
    throw DataError("config: fraction count must equal K");
  if (config.scenario == Scenario::multi && config.layers_per_group.empty())
    throw DataError("config: multi scenario needs layers_per_group");
  if (config.b.kind == BSpec::Kind::multi_suite && config.K != 3)
    throw DataError("config: the multi suite fixes K = 3");
}

struct MonoTruth {
  ConnectivityMatrix B{Eigen::MatrixXd::Zero(1, 1)};
  int d = 0;
};

MonoTruth mono_truth(const ExperimentConfig& config, std::uint64_t seed_r) {
  const auto Bs = config_connectivity(config, seed_r);
  MonoTruth t{Bs.at(0), 0};
  t.d = numerical_rank(t.B.entries());
  return t;
}

// Estimator suite shared by the mono scenarios: cross-validated penalized
// solve, averaging, rank-truncated averaging (true rank and CV rank) and the
// spectral-embedding baseline at r = K and r = d.
void mono_estimator_metrics(const ExperimentConfig& config,
                            const NetworkSample& sample, const MembershipMatrix& Z,
                            const Eigen::MatrixXd& B_true, int d_true,
                            std::uint64_t seed_r,
                            std::map<std::string, double>& m) {
  const AveragedAdjacency avg = average_layers(sample);
  const std::vector<double> grid = make_lambda_grid(
      avg, Z, config.grid_count, config.grid_floor, config.admm.scaling);
  const CvPlan plan = mfold_plan(sample.L(), std::min(config.folds, sample.L()),
                                 derive_seed(seed_r, 1));
  const CvReport cv = cross_validate(sample, Z, plan, grid, config.admm);
  m["err_our"] = frob_error(cv.refit.B_hat.entries(), B_true);
  m["d_our"] = cv.refit.d_hat;
  m["lambda"] = cv.selected_lambda;
  m["clip_frac"] = cv.refit.clipped_fraction;

  const BaselineResult avg_est = averaging_estimator(avg, Z, sample.rho());
  m["err_avg"] = frob_error(avg_est.B_hat.entries(), B_true);
  m["d_avg"] = avg_est.d_hat;

  const BaselineResult lr_true = avg_lowrank(avg, Z, sample.rho(), d_true);
  m["err_avglr_true_d"] = frob_error(lr_true.B_hat.entries(), B_true);

  const RankCvResult rank_cv = avg_lowrank_rank_cv(sample, Z, plan);
  const BaselineResult lr_cv = avg_lowrank(avg, Z, sample.rho(), rank_cv.d);
  m["d_avglr_cv"] = rank_cv.d;
  m["err_avglr_cv"] = frob_error(lr_cv.B_hat.entries(), B_true);

  if (config.spectral_columns) {
    const BaselineResult se_k =
        spectral_embedding_estimator(avg, Z, sample.rho(), Z.K());
    m["err_spec_k"] = frob_error(se_k.B_hat.entries(), B_true);
    const BaselineResult se_d =
        spectral_embedding_estimator(avg, Z, sample.rho(), d_true);
    m["err_spec_d"] = frob_error(se_d.B_hat.entries(), B_true);
  }
}

std::map<std::string, double> run_replicate(const ExperimentConfig& config, int r) {
  const std::uint64_t seed_r = config.seed + static_cast<std::uint64_t>(r);
  std::map<std::string, double> m;
  const SampleOptions sopts{config.self_loops};

  if (config.scenario == Scenario::multi) {
    const auto Bs = config_connectivity(config, seed_r);
    const MembershipMatrix Z = config_membership(config);
    const NetworkSample sample =
        sample_multi(Bs, Z, config.rho, config.layers_per_group, seed_r, sopts);

    MultiOptions opts;
    opts.l_tilde = static_cast<int>(Bs.size());
    opts.folds = config.folds;
    opts.grid_count = config.grid_count;
    opts.grid_floor = config.grid_floor;
    opts.seed = derive_seed(seed_r, 2);
    opts.restarts = config.restarts;
    opts.admm = config.admm;
    const MultiResult res = multisbm_estimate(sample, config.K, opts);

    const AlignmentResult node_align =
        align_labels(res.membership.labels, Z.labels(), config.K);
    m["mis"] = node_align.misclustering_rate;
    m["ari"] = adjusted_rand_index(res.membership.labels, Z.labels());
    m["rbl"] = res.between_layer_err.value_or(0.0);

    // Map estimated groups onto the ground-truth groups before comparing.
    const int Lt = res.grouping.L_tilde;
    Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(Lt, Lt);
    const auto& truth_groups = *sample.group_labels();
    for (int l = 0; l < sample.L(); ++l)
      confusion(res.grouping.group_of[l], truth_groups[l]) += 1.0;
    const auto [gperm, agreement] = best_agreement_permutation(confusion);
    (void)agreement;

    const MembershipMatrix Z_hat(res.membership.labels, config.K);
    for (int g = 0; g < Lt; ++g) {
      const int t = gperm[g];  // estimated group g plays true group t
      const Eigen::MatrixXd& B_true = Bs[t].entries();
      const int d_true = numerical_rank(B_true);
      const GroupEstimate& est = res.groups[g];
      const Eigen::MatrixXd our =
          permute_blocks(est.solve.B_hat.entries(), node_align.permutation);
      m[metric_group_key("err_our", t)] = frob_error(our, B_true);
      m[metric_group_key("d_our", t)] = est.solve.d_hat;
      m[metric_group_key("lambda", t)] = est.lambda;

      const AveragedAdjacency group_avg =
          AveragedAdjacency::average(sample, est.layers);
      const BaselineResult avg_est =
          averaging_estimator(group_avg, Z_hat, sample.rho());
      m[metric_group_key("err_avg", t)] = frob_error(
          permute_blocks(avg_est.B_hat.entries(), node_align.permutation), B_true);
      m[metric_group_key("d_avg", t)] = avg_est.d_hat;

      int lr_rank = est.solve.d_hat > 0 ? est.solve.d_hat : 1;
      if (est.layers.size() >= 2) {
        const NetworkSample group_sample = sample.subset(est.layers);
        const CvPlan plan =
            mfold_plan(group_sample.L(),
                       std::min(config.folds, group_sample.L()),
                       derive_seed(seed_r, 300 + g));
        lr_rank = avg_lowrank_rank_cv(group_sample, Z_hat, plan).d;
      }
      const BaselineResult lr =
          avg_lowrank(group_avg, Z_hat, sample.rho(), lr_rank);
      m[metric_group_key("err_avglr", t)] = frob_error(
          permute_blocks(lr.B_hat.entries(), node_align.permutation), B_true);
      m[metric_group_key("d_avglr", t)] = lr_rank;

      if (config.spectral_columns) {
        const BaselineResult se_k =
            spectral_embedding_estimator(group_avg, Z_hat, sample.rho(), config.K);
        m[metric_group_key("err_spec_k", t)] = frob_error(
            permute_blocks(se_k.B_hat.entries(), node_align.permutation), B_true);
        const BaselineResult se_d =
            spectral_embedding_estimator(group_avg, Z_hat, sample.rho(), d_true);
        m[metric_group_key("err_spec_d", t)] = frob_error(
            permute_blocks(se_d.B_hat.entries(), node_align.permutation), B_true);
      }
    }
    return m;
  }

  const MonoTruth truth = mono_truth(config, seed_r);
  const MembershipMatrix Z = config_membership(config);
  const NetworkSample sample =
      sample_mono(truth.B, Z, config.rho, config.L, seed_r, sopts);

  switch (config.scenario) {
    case Scenario::mono_known_z: {
      mono_estimator_metrics(config, sample, Z, truth.B.entries(), truth.d, seed_r, m);
      break;
    }
    case Scenario::mono_estimated_z: {
      const AveragedAdjacency avg = average_layers(sample);
      const ClusterAssignment cl =
          spectral_cluster(avg, config.K, config.K, ClusterEngine::gmm,
                           derive_seed(seed_r, 3), true, config.restarts);
      const AlignmentResult align = align_labels(cl.labels, Z.labels(), config.K);
      m["mis"] = align.misclustering_rate;
      m["ari"] = adjusted_rand_index(cl.labels, Z.labels());
      const MembershipMatrix Z_hat(align.aligned, config.K);
      mono_estimator_metrics(config, sample, Z_hat, truth.B.entries(), truth.d,
                             seed_r, m);
      break;
    }
    case Scenario::reestimate: {
      ReestimateOptions opts;
      opts.folds = config.folds;
      opts.grid_count = config.grid_count;
      opts.grid_floor = config.grid_floor;
      opts.seed = derive_seed(seed_r, 4);
      opts.restarts = config.restarts;
      opts.admm = config.admm;
      const ReestimateResult res = reestimate_pipeline(sample, config.K, opts);

      const AlignmentResult a0 = align_labels(res.initial.labels, Z.labels(), config.K);
      const AlignmentResult a1 =
          align_labels(res.final_assignment.labels, Z.labels(), config.K);
      m["mis_initial"] = a0.misclustering_rate;
      m["mis_final"] = a1.misclustering_rate;
      m["improved"] = a1.misclustering_rate < a0.misclustering_rate ? 1.0 : 0.0;
      m["d_hat"] = res.d_hat;
      m["ari_final"] = adjusted_rand_index(res.final_assignment.labels, Z.labels());
      m["err_initial"] = frob_error(
          permute_blocks(res.cv.refit.B_hat.entries(), a0.permutation),
          truth.B.entries());
      m["err_final"] = frob_error(
          permute_blocks(res.final_B.B_hat.entries(), a1.permutation),
          truth.B.entries());
      m["lambda"] = res.cv.selected_lambda;
      break;
    }
    default:
      throw DataError("run_experiment: scenario not supported here");
  }
  return m;
}

}  // namespace

MembershipMatrix config_membership(const ExperimentConfig& config) {
  std::vector<double> fractions = config.community_fractions;
  if (fractions.empty()) fractions.assign(config.K, 1.0 / config.K);
  return MembershipMatrix::from_sizes(sizes_from_fractions(fractions, config.n));
}

std::vector<ConnectivityMatrix> config_connectivity(const ExperimentConfig& config,
                                                    std::uint64_t seed) {
  switch (config.b.kind) {
    case BSpec::Kind::explicit_matrix:
      return {ConnectivityMatrix(config.b.matrix)};
    case BSpec::Kind::rank1_geometric: {
      Eigen::VectorXd u(config.K);
      double p = 1.0;
      for (int k = 0; k < config.K; ++k) {
        p *= config.b.geometric_p;
        u(k) = p;
      }
      return {ConnectivityMatrix::symmetrized(u * u.transpose(), true, 1)};
    }
    case BSpec::Kind::uniform_rank: {
      if (config.b.rank < 1 || config.b.rank > config.K)
        throw DataError("config: uniform-rank factor count out of range");
      Rng rng(derive_seed(seed, 0xB));
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(config.K, config.K);
      for (int i = 0; i < config.b.rank; ++i) {
        Eigen::VectorXd u(config.K);
        for (int k = 0; k < config.K; ++k) u(k) = rng.uniform(0.2, 0.9);
        B += u * u.transpose();
      }
      B /= config.b.rank;
      return {ConnectivityMatrix::symmetrized(B)};
    }
    case BSpec::Kind::multi_suite:
      return multi_suite();
  }
  throw DataError("config: unknown B spec");
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  check_config(config);
  if (config.scenario == Scenario::truncation)
    throw UsageError("run_experiment: use sweep_truncation for the truncation scenario");

  ExperimentReport report;
  report.config = config;
  report.rows.resize(config.replicates);
  parallel_for(static_cast<std::size_t>(config.replicates), [&](std::size_t r) {
    ReplicateRow& row = report.rows[r];
    row.replicate = static_cast<int>(r);
    try {
      row.metrics = run_replicate(config, static_cast<int>(r));
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });

  for (const ReplicateRow& row : report.rows)
    if (row.failed) ++report.failures;

  // mean and standard error over the successful replicates, in replicate order
  std::map<std::string, std::vector<double>> columns;
  for (const ReplicateRow& row : report.rows) {
    if (row.failed) continue;
    for (const auto& [key, value] : row.metrics) columns[key].push_back(value);
  }
  for (const auto& [key, values] : columns) {
    MetricAggregate agg;
    agg.count = static_cast<int>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    agg.mean = sum / agg.count;
    if (agg.count > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
      agg.stderr_ = std::sqrt(ss / (agg.count - 1)) / std::sqrt(agg.count);
    }
    report.aggregates[key] = agg;
  }
  return report;
}

TruncationSweep sweep_truncation(const ExperimentConfig& config,
                                 const std::vector<int>& r_values) {
  check_config(config);
  if (config.L != 1)
    throw DataError("truncation sweep: single-layer configuration required");
  if (r_values.empty()) throw DataError("truncation sweep: empty rank grid");
  for (std::size_t i = 0; i < r_values.size(); ++i) {
    if (r_values[i] < 1 || r_values[i] > config.n)
      throw DataError("truncation sweep: rank out of range");
    if (i > 0 && r_values[i] <= r_values[i - 1])
      throw DataError("truncation sweep: ranks must be strictly ascending");
  }

  TruncationSweep sweep;
  sweep.r_values = r_values;
  const int R = static_cast<int>(r_values.size());
  sweep.relative_errors.setConstant(config.replicates, R,
                                    std::numeric_limits<double>::quiet_NaN());
  sweep.argmin_rank.assign(config.replicates, 0);
  std::vector<char> failed(config.replicates, 0);

  parallel_for(static_cast<std::size_t>(config.replicates), [&](std::size_t rep) {
    try {
      const std::uint64_t seed_r = config.seed + static_cast<std::uint64_t>(rep);
      const MonoTruth truth = mono_truth(config, seed_r);
      const MembershipMatrix Z = config_membership(config);
      const NetworkSample sample = sample_mono(truth.B, Z, config.rho, 1, seed_r,
                                               SampleOptions{config.self_loops});
      const AveragedAdjacency avg = average_layers(sample);
      const int rmax = r_values.back();
      const SpectrumResult top =
          sym_eig_topk(avg.dense(), rmax, EigOrder::by_magnitude);
      const Eigen::MatrixXd P = Z.indicator().transpose() * top.vectors;
      Eigen::VectorXd nhat(Z.K());
      for (int k = 0; k < Z.K(); ++k) nhat(k) = Z.community_sizes()[k];
      const double b_norm = truth.B.entries().norm();

      // Accumulate Z^T A^(r) Z one eigenpair at a time.
      Eigen::MatrixXd S = Eigen::MatrixXd::Zero(Z.K(), Z.K());
      int next = 0;
      for (int j = 0; j < rmax; ++j) {
        S += top.values(j) * P.col(j) * P.col(j).transpose();
        if (next < R && r_values[next] == j + 1) {
          Eigen::MatrixXd B_hat(Z.K(), Z.K());
          for (int k = 0; k < Z.K(); ++k)
            for (int l = 0; l < Z.K(); ++l)
              B_hat(k, l) = S(k, l) / (config.rho * nhat(k) * nhat(l));
          sweep.relative_errors(static_cast<int>(rep), next) =
              (B_hat - truth.B.entries()).norm() / b_norm;
          ++next;
        }
      }
      int best = 0;
      for (int c = 1; c < R; ++c)
        if (sweep.relative_errors(static_cast<int>(rep), c) <
            sweep.relative_errors(static_cast<int>(rep), best))
          best = c;
      sweep.argmin_rank[rep] = r_values[best];
    } catch (const std::exception&) {
      failed[rep] = 1;
    }
  });

  sweep.mean_relative_error.assign(R, 0.0);
  int ok = 0;
  for (int rep = 0; rep < config.replicates; ++rep) {
    if (failed[rep]) {
      ++sweep.failures;
      continue;
    }
    ++ok;
    for (int c = 0; c < R; ++c)
      sweep.mean_relative_error[c] += sweep.relative_errors(rep, c);
  }
  if (ok > 0)
    for (double& v : sweep.mean_relative_error) v /= ok;
  return sweep;
}

ExperimentConfig preset(const std::string& name, bool paper_scale) {
  ExperimentConfig c;
  c.name = name;
  c.admm.epsilon = 1e-12;
  c.admm.max_iters = 50000;
  if (name == "mono-known") {
    c.scenario = Scenario::mono_known_z;
    c.n = paper_scale ? 10000 : 1000;
    c.K = 10;
    c.L = 100;
    c.rho = 0.1;
    c.replicates = paper_scale ? 100 : 20;
    c.b.kind = BSpec::Kind::rank1_geometric;
    c.b.geometric_p = 0.9;
    c.community_fractions = {0.15, 0.15, 0.1, 0.1, 0.1, 0.08, 0.08, 0.08, 0.08, 0.08};
    c.spectral_columns = !paper_scale;
  } else if (name == "mono-estimated") {
    c.scenario = Scenario::mono_estimated_z;
    c.n = paper_scale ? 10000 : 2000;
    c.K = 10;
    c.L = 100;
    c.rho = 0.1;
    c.replicates = paper_scale ? 100 : 20;
    c.b.kind = BSpec::Kind::rank1_geometric;
    c.b.geometric_p = 0.9;
    c.community_fractions = {0.15, 0.15, 0.1, 0.1, 0.1, 0.08, 0.08, 0.08, 0.08, 0.08};
    c.spectral_columns = !paper_scale;
  } else if (name == "reestimate") {
    c.scenario = Scenario::reestimate;
    c.n = 1000;
    c.K = 10;
    c.L = 50;
    c.rho = 0.15;
    c.replicates = paper_scale ? 100 : 20;
    c.b.kind = BSpec::Kind::uniform_rank;
    c.b.rank = 2;
    c.community_fractions = {0.15, 0.15, 0.1, 0.1, 0.1, 0.08, 0.08, 0.08, 0.08, 0.08};
  } else if (name == "multi") {
    c.scenario = Scenario::multi;
    c.n = paper_scale ? 1000 : 500;
    c.K = 3;
    const int per_group = paper_scale ? 50 : 20;
    c.layers_per_group = {per_group, per_group, per_group, per_group};
    c.L = 4 * per_group;
    c.rho = std::log(static_cast<double>(c.n)) / c.n;
    c.replicates = paper_scale ? 100 : 20;
    c.b.kind = BSpec::Kind::multi_suite;
    c.community_fractions = {0.25, 0.25, 0.5};
  } else if (name == "trunc-dense" || name == "trunc-sparse") {
    c.scenario = Scenario::truncation;
    c.n = paper_scale ? 1000 : 500;
    c.K = 2;
    c.L = 1;
    c.rho = name == "trunc-dense" ? 1.0
                                  : std::log(static_cast<double>(c.n)) / c.n;
    c.replicates = paper_scale ? 100 : 20;
    c.b.kind = BSpec::Kind::explicit_matrix;
    c.b.matrix.resize(2, 2);
    c.b.matrix << 0.6, 0.3, 0.3, 0.5;
    c.truncation_ranks = {1, 2, 3, 4, 5, 6, 8, 10, 14, 20, 30, 50, 80, 120, 200, 350, c.n};
  } else {
    throw UsageError("unknown preset '" + name + "'");
  }
  return c;
}

std::vector<std::string> preset_names() {
  return {"mono-known", "mono-estimated", "reestimate", "multi", "trunc-dense",
          "trunc-sparse"};
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  json j;
  j["format_version"] = 1;
  j["name"] = c.name;
  j["scenario"] = scenario_name(c.scenario);
  j["n"] = c.n;
  j["K"] = c.K;
  j["L"] = c.L;
  j["rho"] = c.rho;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  switch (c.b.kind) {
    case BSpec::Kind::explicit_matrix: {
      j["b"]["kind"] = "explicit";
      std::vector<std::vector<double>> rows;
      for (int i = 0; i < c.b.matrix.rows(); ++i) {
        std::vector<double> row;
        for (int k = 0; k < c.b.matrix.cols(); ++k) row.push_back(c.b.matrix(i, k));
        rows.push_back(row);
      }
      j["b"]["matrix"] = rows;
      break;
    }
    case BSpec::Kind::rank1_geometric:
      j["b"]["kind"] = "rank1-geometric";
      j["b"]["p"] = c.b.geometric_p;
      break;
    case BSpec::Kind::uniform_rank:
      j["b"]["kind"] = "uniform-rank";
      j["b"]["rank"] = c.b.rank;
      break;
    case BSpec::Kind::multi_suite:
      j["b"]["kind"] = "multi-suite";
      break;
  }
  j["community_fractions"] = c.community_fractions;
  j["layers_per_group"] = c.layers_per_group;
  j["grid_count"] = c.grid_count;
  j["grid_floor"] = c.grid_floor;
  j["folds"] = c.folds;
  j["restarts"] = c.restarts;
  j["self_loops"] = c.self_loops;
  j["spectral_columns"] = c.spectral_columns;
  j["truncation_ranks"] = c.truncation_ranks;
  j["admm"]["rho1"] = c.admm.rho1;
  j["admm"]["epsilon"] = c.admm.epsilon;
  j["admm"]["max_iters"] = c.admm.max_iters;
  j["admm"]["scaling"] = c.admm.scaling == Scaling::per_node ? "per-node" : "raw";
  j["admm"]["clip"] = c.admm.clip;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.name = j.value("name", "");
  c.scenario = scenario_from_name(j.at("scenario").get<std::string>());
  c.n = j.at("n").get<int>();
  c.K = j.at("K").get<int>();
  c.L = j.value("L", 0);
  c.rho = j.at("rho").get<double>();
  c.replicates = j.at("replicates").get<int>();
  c.seed = j.value("seed", 1ULL);
  if (j.contains("b")) {
    const std::string kind = j["b"].value("kind", "rank1-geometric");
    if (kind == "explicit") {
      const auto rows = j["b"].at("matrix");
      const int K = static_cast<int>(rows.size());
      c.b.kind = BSpec::Kind::explicit_matrix;
      c.b.matrix.resize(K, K);
      for (int i = 0; i < K; ++i)
        for (int k = 0; k < K; ++k) c.b.matrix(i, k) = rows[i][k].get<double>();
    } else if (kind == "rank1-geometric") {
      c.b.kind = BSpec::Kind::rank1_geometric;
      c.b.geometric_p = j["b"].value("p", 0.9);
    } else if (kind == "uniform-rank") {
      c.b.kind = BSpec::Kind::uniform_rank;
      c.b.rank = j["b"].value("rank", 1);
    } else if (kind == "multi-suite") {
      c.b.kind = BSpec::Kind::multi_suite;
    } else {
      throw DataError("config: unknown B kind '" + kind + "'");
    }
  }
  c.community_fractions = j.value("community_fractions", std::vector<double>{});
  c.layers_per_group = j.value("layers_per_group", std::vector<int>{});
  c.grid_count = j.value("grid_count", 50);
  c.grid_floor = j.value("grid_floor", 1e-4);
  c.folds = j.value("folds", 5);
  c.restarts = j.value("restarts", 10);
  c.self_loops = j.value("self_loops", true);
  c.spectral_columns = j.value("spectral_columns", true);
  c.truncation_ranks = j.value("truncation_ranks", std::vector<int>{});
  if (j.contains("admm")) {
    const auto& a = j["admm"];
    c.admm.rho1 = a.value("rho1", 1.0);
    c.admm.epsilon = a.value("epsilon", 1e-12);
    c.admm.max_iters = a.value("max_iters", 50000);
    c.admm.scaling =
        a.value("scaling", "per-node") == std::string("raw") ? Scaling::raw
                                                             : Scaling::per_node;
    c.admm.clip = a.value("clip", true);
  } else {
    c.admm.epsilon = 1e-12;
    c.admm.max_iters = 50000;
  }
  return c;
}

nlohmann::json report_json(const ExperimentReport& report) {
  json j;
  j["format_version"] = 1;
  j["config"] = config_to_json(report.config);
  j["failures"] = report.failures;
  json rows = json::array();
  for (const ReplicateRow& row : report.rows) {
    json jr;
    jr["replicate"] = row.replicate;
    jr["failed"] = row.failed;
    if (row.failed) jr["error"] = row.error;
    jr["metrics"] = row.metrics;
    rows.push_back(jr);
  }
  j["rows"] = rows;
  json aggs;
  for (const auto& [key, agg] : report.aggregates) {
    aggs[key] = {{"mean", agg.mean}, {"stderr", agg.stderr_}, {"count", agg.count}};
  }
  j["aggregates"] = aggs;
  return j;
}

nlohmann::json sweep_json(const ExperimentConfig& config, const TruncationSweep& sweep) {
  json j;
  j["format_version"] = 1;
  j["config"] = config_to_json(config);
  j["r_values"] = sweep.r_values;
  j["mean_relative_error"] = sweep.mean_relative_error;
  j["argmin_rank_per_replicate"] = sweep.argmin_rank;
  j["failures"] = sweep.failures;
  int best = 0;
  for (std::size_t c = 1; c < sweep.mean_relative_error.size(); ++c)
    if (sweep.mean_relative_error[c] < sweep.mean_relative_error[best])
      best = static_cast<int>(c);
  j["argmin_rank_mean_curve"] = sweep.r_values[best];
  return j;
}

}  // namespace netblock
