// Command-line front end: simulate, estimate, multi, cv, bench, scree.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "netblock/baselines.hpp"
#include "netblock/clustering.hpp"
#include "netblock/errors.hpp"
#include "netblock/experiments.hpp"
#include "netblock/io.hpp"
#include "netblock/multilayer.hpp"
#include "netblock/numerics.hpp"
#include "netblock/rng.hpp"
#include "netblock/sampler.hpp"
#include "netblock/tuning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace netblock;

namespace {

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stoi(cell));
    } catch (...) {
      throw UsageError("cannot parse integer list entry '" + cell + "'");
    }
  }
  if (out.empty()) throw UsageError("empty integer list");
  return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (...) {
      throw UsageError("cannot parse number list entry '" + cell + "'");
    }
  }
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

void write_json(const json& j, const std::string& path) {
  if (path == "-" || path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_text_file(path, j.dump(2) + "\n");
  }
}

json solve_result_json(const SolveResult& result) {
  json j;
  j["d_hat"] = result.d_hat;
  j["lambda"] = result.lambda_used;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["objective"] = result.objective_value;
  j["clipped_fraction"] = result.clipped_fraction;
  return j;
}

json cv_report_json(const CvReport& report) {
  json j;
  j["format_version"] = 1;
  j["lambdas"] = report.lambdas;
  json losses = json::array();
  for (int s = 0; s < report.per_split_loss.rows(); ++s) {
    std::vector<double> row;
    for (int c = 0; c < report.per_split_loss.cols(); ++c)
      row.push_back(report.per_split_loss(s, c));
    losses.push_back(row);
  }
  j["per_split_loss"] = losses;
  j["total_loss"] = report.total_loss;
  j["selected_lambda"] = report.selected_lambda;
  j["selected_index"] = report.selected_index;
  j["mode"] = report.mode == CvMode::mfold ? "mfold" : "repeated";
  j["refit"] = solve_result_json(report.refit);
  return j;
}

struct SimulateArgs {
  std::string out_dir;
  std::string stem = "sample";
  int n = 0;
  double rho = 0.0;
  int layers = 1;
  std::uint64_t seed = 1;
  std::vector<std::string> b_files;
  double geometric_p = 0.0;
  int uniform_rank = 0;
  bool suite54 = false;
  std::string sizes_csv, fractions_csv, labels_file;
  std::string layers_per_group_csv;
  bool no_self_loops = false;
};

int run_simulate(const SimulateArgs& a) {
  MembershipMatrix Z = [&]() {
    if (!a.labels_file.empty()) return read_labels(a.labels_file);
    if (!a.sizes_csv.empty())
      return MembershipMatrix::from_sizes(parse_int_list(a.sizes_csv));
    if (!a.fractions_csv.empty()) {
      const std::vector<double> fr = parse_double_list(a.fractions_csv);
      ExperimentConfig tmp;
      tmp.n = a.n;
      tmp.K = static_cast<int>(fr.size());
      tmp.community_fractions = fr;
      return config_membership(tmp);
    }
    throw UsageError("simulate: provide --sizes, --fractions or --labels");
  }();

  std::vector<ConnectivityMatrix> Bs;
  if (a.suite54) {
    ExperimentConfig tmp;
    tmp.K = 3;
    tmp.b.kind = BSpec::Kind::multi_suite;
    Bs = config_connectivity(tmp, a.seed);
  } else if (!a.b_files.empty()) {
    for (const std::string& f : a.b_files)
      Bs.push_back(ConnectivityMatrix(read_matrix_csv(f)));
  } else if (a.geometric_p > 0.0) {
    ExperimentConfig tmp;
    tmp.K = Z.K();
    tmp.b.kind = BSpec::Kind::rank1_geometric;
    tmp.b.geometric_p = a.geometric_p;
    Bs = config_connectivity(tmp, a.seed);
  } else if (a.uniform_rank > 0) {
    ExperimentConfig tmp;
    tmp.K = Z.K();
    tmp.b.kind = BSpec::Kind::uniform_rank;
    tmp.b.rank = a.uniform_rank;
    Bs = config_connectivity(tmp, a.seed);
  } else {
    throw UsageError(
        "simulate: provide --b-file, --geometric-p, --uniform-rank or --suite54");
  }

  const SampleOptions opts{!a.no_self_loops};
  NetworkSample sample = [&]() {
    if (Bs.size() == 1) return sample_mono(Bs[0], Z, a.rho, a.layers, a.seed, opts);
    if (a.layers_per_group_csv.empty())
      throw UsageError("simulate: multi-group simulation needs --layers-per-group");
    return sample_multi(Bs, Z, a.rho, parse_int_list(a.layers_per_group_csv),
                        a.seed, opts);
  }();
  const fs::path manifest = write_sample(sample, a.out_dir, a.stem);
  std::cout << manifest.string() << "\n";
  return 0;
}

struct PipelineArgs {
  std::string manifest;
  int k = 0;
  std::string labels_file;
  std::string clustering = "gmm";  // gmm | kmeans | bias-adjusted
  std::string engine = "gmm";      // clustering engine for spectral features
  int embed_dim = 0;               // defaults to k
  bool use_cv = false;
  double lambda = 0.0;
  int folds = 5;
  std::string cv_mode = "mfold";
  int train_size = 0;
  int grid_count = 50;
  double grid_floor = 1e-4;
  std::string scaling = "per-node";
  bool no_clip = false;
  double rho_override = 0.0;
  std::uint64_t seed = 1;
  int restarts = 10;
  bool drop_self_loops = false;
  std::string out = "-";
  std::string b_out;
  int l_tilde = 0;  // multi only
};

AdmmConfig admm_from_args(const PipelineArgs& a) {
  AdmmConfig cfg;
  cfg.scaling = a.scaling == "raw" ? Scaling::raw : Scaling::per_node;
  cfg.clip = !a.no_clip;
  cfg.epsilon = 1e-12;
  cfg.max_iters = 50000;
  return cfg;
}

ClusterEngine engine_from_name(const std::string& name) {
  if (name == "gmm") return ClusterEngine::gmm;
  if (name == "kmeans") return ClusterEngine::kmeans;
  throw UsageError("unknown engine '" + name + "' (use gmm or kmeans)");
}

NetworkSample load_sample(const PipelineArgs& a) {
  NetworkSample sample = ingest_sample(a.manifest, IngestOptions{a.drop_self_loops});
  if (a.rho_override > 0.0) {
    return NetworkSample(std::vector<BinaryLayer>(sample.layers()), a.rho_override,
                         sample.group_labels());
  }
  return sample;
}

MembershipMatrix resolve_membership(const PipelineArgs& a, const NetworkSample& sample,
                                    json& report) {
  if (!a.labels_file.empty()) {
    MembershipMatrix Z = read_labels(a.labels_file);
    if (Z.n() != sample.n())
      throw DataError("labels: node count does not match the sample");
    report["membership"] = {{"source", "file"}, {"K", Z.K()}};
    return Z;
  }
  if (a.k < 1) throw UsageError("provide --k when clustering memberships");
  ClusterAssignment cl = [&]() {
    if (a.clustering == "bias-adjusted")
      return bias_adjusted_spectral(sample, a.k, engine_from_name(a.engine), a.seed,
                                    a.restarts);
    const int embed = a.embed_dim > 0 ? a.embed_dim : a.k;
    return spectral_cluster(average_layers(sample), a.k, embed,
                            engine_from_name(a.clustering), a.seed, true, a.restarts);
  }();
  report["membership"] = {{"source", cl.method},
                          {"K", cl.K},
                          {"features", cl.features},
                          {"degenerate", cl.degenerate}};
  return MembershipMatrix(cl.labels, a.k);
}

CvPlan plan_from_args(const PipelineArgs& a, int L) {
  if (a.cv_mode == "repeated") {
    const int t = a.train_size > 0 ? a.train_size : (L + 1) / 2;
    return repeated_splits(L, t, derive_seed(a.seed, 17));
  }
  return mfold_plan(L, std::min(a.folds, L), derive_seed(a.seed, 17));
}

int run_estimate(const PipelineArgs& a, bool cv_only) {
  const NetworkSample sample = load_sample(a);
  json report;
  report["format_version"] = 1;
  report["n"] = sample.n();
  report["L"] = sample.L();
  report["rho"] = sample.rho();
  const MembershipMatrix Z = resolve_membership(a, sample, report);
  const AveragedAdjacency avg = average_layers(sample);
  const AdmmConfig cfg = admm_from_args(a);

  const bool cv = cv_only || a.use_cv || a.lambda <= 0.0;
  if (cv && sample.L() < 2)
    throw UsageError(
        "cross-validation needs at least two layers; pass an explicit --lambda");

  SolveResult solved;
  if (cv) {
    const std::vector<double> grid =
        make_lambda_grid(avg, Z, a.grid_count, a.grid_floor, cfg.scaling);
    const CvReport cvrep =
        cross_validate(sample, Z, plan_from_args(a, sample.L()), grid, cfg);
    report["cv"] = cv_report_json(cvrep);
    solved = cvrep.refit;
  } else {
    AdmmConfig fixed = cfg;
    fixed.lambda = a.lambda;
    solved = admm_solve(avg, Z, sample.rho(), fixed);
  }
  report["estimate"] = solve_result_json(solved);

  const BaselineResult avg_est = averaging_estimator(avg, Z, sample.rho());
  report["averaging"] = {{"d_hat", avg_est.d_hat}};
  if (!a.b_out.empty()) {
    write_matrix_csv(solved.B_hat.entries(), a.b_out);
    report["b_csv"] = a.b_out;
  }
  write_json(report, a.out);
  return 0;
}

int run_multi(const PipelineArgs& a, const std::string& b_out_dir) {
  const NetworkSample sample = load_sample(a);
  if (a.k < 1) throw UsageError("multi: provide --k");

  MultiOptions opts;
  if (a.l_tilde > 0) opts.l_tilde = a.l_tilde;
  opts.folds = a.folds;
  opts.grid_count = a.grid_count;
  opts.grid_floor = a.grid_floor;
  opts.engine = engine_from_name(a.engine);
  opts.seed = a.seed;
  opts.restarts = a.restarts;
  opts.admm = admm_from_args(a);
  if (a.lambda > 0.0) opts.fixed_lambda = a.lambda;

  const MultiResult res = multisbm_estimate(sample, a.k, opts);

  json report;
  report["format_version"] = 1;
  report["n"] = sample.n();
  report["L"] = sample.L();
  report["rho"] = sample.rho();
  report["membership"] = {{"source", res.membership.method},
                          {"K", res.membership.K},
                          {"degenerate", res.membership.degenerate}};
  report["l_tilde"] = res.grouping.L_tilde;
  if (res.estimated_l_tilde) report["l_tilde_estimated"] = *res.estimated_l_tilde;
  json groups = json::array();
  for (std::size_t g = 0; g < res.groups.size(); ++g) {
    const GroupEstimate& est = res.groups[g];
    json jg = solve_result_json(est.solve);
    std::vector<int> one_based;
    for (int l : est.layers) one_based.push_back(l + 1);
    jg["layers"] = one_based;
    jg["no_cv"] = est.no_cv;
    if (!b_out_dir.empty()) {
      fs::create_directories(b_out_dir);
      const fs::path p =
          fs::path(b_out_dir) / ("B_group" + std::to_string(g + 1) + ".csv");
      write_matrix_csv(est.solve.B_hat.entries(), p);
      jg["b_csv"] = p.string();
    }
    groups.push_back(jg);
  }
  report["groups"] = groups;
  if (res.between_layer_err) report["between_layer_error"] = *res.between_layer_err;
  write_json(report, a.out);
  return 0;
}

int run_scree(const PipelineArgs& a, const std::string& features, int max_candidates) {
  const NetworkSample sample = load_sample(a);
  json report;
  report["format_version"] = 1;
  report["features"] = features;

  Eigen::VectorXd sigma;
  if (features == "a") {
    sigma = layer_feature_singular_values(sample, nullptr, sample.rho(),
                                          LayerFeatureLevel::per_layer_A);
  } else {
    const MembershipMatrix Z = resolve_membership(a, sample, report);
    if (features == "b") {
      sigma = layer_feature_singular_values(sample, &Z, sample.rho(),
                                            LayerFeatureLevel::per_layer_B);
    } else if (features == "bavg") {
      const BaselineResult avg_est =
          averaging_estimator(average_layers(sample), Z, sample.rho());
      sigma = svd_full(avg_est.B_hat.entries()).singular_values;
    } else {
      throw UsageError("scree: --features must be a, b or bavg");
    }
  }
  std::vector<double> values(sigma.data(), sigma.data() + sigma.size());
  report["singular_values"] = values;
  const int cap = max_candidates > 0
                      ? max_candidates
                      : static_cast<int>(sigma.size()) - 1;
  if (sigma.size() >= 2 && sigma(0) > 0.0) {
    const ScreeResult elbow = estimate_l_tilde_from_sigma(sigma, cap);
    report["elbow"] = elbow.l_tilde;
  }
  write_json(report, a.out);
  return 0;
}

struct BenchArgs {
  std::string preset_name;
  bool paper_scale = false;
  std::string config_file;
  int replicates_override = 0;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  std::string out = "-";
};

int run_bench(const BenchArgs& a) {
  ExperimentConfig config = [&]() {
    if (!a.config_file.empty()) {
      std::ifstream in(a.config_file);
      if (!in) throw DataError("bench: cannot open " + a.config_file);
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw DataError("bench: invalid JSON config: " + std::string(e.what()));
      }
      return config_from_json(j);
    }
    if (a.preset_name.empty())
      throw UsageError("bench: provide --preset or --config");
    return preset(a.preset_name, a.paper_scale);
  }();
  if (a.replicates_override > 0) config.replicates = a.replicates_override;
  if (a.has_seed_override) config.seed = a.seed_override;

  if (config.scenario == Scenario::truncation) {
    const TruncationSweep sweep = sweep_truncation(config, config.truncation_ranks);
    write_json(sweep_json(config, sweep), a.out);
  } else {
    const ExperimentReport report = run_experiment(config);
    write_json(report_json(report), a.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block connectivity and rank estimation for samples of networks"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Sample blockmodel layers to disk");
  simulate->add_option("--out", sim.out_dir, "Output directory")->required();
  simulate->add_option("--stem", sim.stem, "File stem");
  simulate->add_option("--n", sim.n, "Node count (with --fractions)");
  simulate->add_option("--rho", sim.rho, "Sparsity factor in (0,1]")->required();
  simulate->add_option("--layers", sim.layers, "Layer count (single group)");
  simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("--b-file", sim.b_files, "Connectivity CSV (repeatable)");
  simulate->add_option("--geometric-p", sim.geometric_p,
                       "Rank-one B = u u^T with u = (p, p^2, ...)");
  simulate->add_option("--uniform-rank", sim.uniform_rank,
                       "Random B as a mean of r rank-one factors");
  simulate->add_flag("--suite54", sim.suite54, "Four-group heterogeneous suite");
  simulate->add_option("--sizes", sim.sizes_csv, "Community sizes, comma separated");
  simulate->add_option("--fractions", sim.fractions_csv,
                       "Community fractions, comma separated");
  simulate->add_option("--labels", sim.labels_file, "Labels file for memberships");
  simulate->add_option("--layers-per-group", sim.layers_per_group_csv,
                       "Layer counts per group (multi)");
  simulate->add_flag("--no-self-loops", sim.no_self_loops,
                     "Do not sample diagonal entries");

  auto add_pipeline_flags = [](CLI::App* cmd, PipelineArgs& a, bool with_lambda) {
    cmd->add_option("--manifest", a.manifest, "Sample manifest JSON")->required();
    cmd->add_option("--k", a.k, "Community count");
    cmd->add_option("--labels", a.labels_file, "Known membership labels file");
    cmd->add_option("--clustering", a.clustering,
                    "Membership estimation: gmm, kmeans or bias-adjusted");
    cmd->add_option("--engine", a.engine, "Clustering engine: gmm or kmeans");
    cmd->add_option("--embed-dim", a.embed_dim, "Spectral embedding dimension");
    if (with_lambda) {
      cmd->add_flag("--cv", a.use_cv, "Select lambda by cross-validation");
      cmd->add_option("--lambda", a.lambda, "Fixed penalty weight");
    }
    cmd->add_option("--folds", a.folds, "Fold count for M-fold CV");
    cmd->add_option("--cv-mode", a.cv_mode, "mfold or repeated");
    cmd->add_option("--train-size", a.train_size, "Training layers per repeated split");
    cmd->add_option("--grid-count", a.grid_count, "Lambda grid size");
    cmd->add_option("--grid-floor", a.grid_floor, "Grid floor ratio");
    cmd->add_option("--scaling", a.scaling, "Loss scaling: per-node or raw");
    cmd->add_flag("--no-clip", a.no_clip, "Keep estimates outside [0,1]");
    cmd->add_option("--rho", a.rho_override, "Override the manifest sparsity factor");
    cmd->add_option("--seed", a.seed, "RNG seed");
    cmd->add_option("--restarts", a.restarts, "Clustering restarts");
    cmd->add_flag("--drop-self-loops", a.drop_self_loops,
                  "Zero diagonals while loading");
    cmd->add_option("--out", a.out, "Report JSON path ('-' for stdout)");
  };

  PipelineArgs est;
  auto* estimate = app.add_subcommand("estimate", "Single-group estimation pipeline");
  add_pipeline_flags(estimate, est, true);
  estimate->add_option("--b-out", est.b_out, "Write the estimated B as CSV");

  PipelineArgs multi_args;
  std::string b_out_dir;
  auto* multi = app.add_subcommand("multi", "Two-stage multilayer pipeline");
  add_pipeline_flags(multi, multi_args, true);
  multi->add_option("--l-tilde", multi_args.l_tilde,
                    "Group count (estimated from the scree elbow when absent)");
  multi->add_option("--b-out-dir", b_out_dir, "Directory for per-group B CSVs");

  PipelineArgs cv_args;
  auto* cv = app.add_subcommand("cv", "Report the lambda path and CV losses");
  add_pipeline_flags(cv, cv_args, false);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a Monte-Carlo benchmark");
  bench_cmd->add_option("--preset", bench.preset_name,
                        "One of: mono-known, mono-estimated, reestimate, multi, "
                        "trunc-dense, trunc-sparse");
  bench_cmd->add_flag("--paper-scale", bench.paper_scale, "Full-size configuration");
  bench_cmd->add_option("--config", bench.config_file, "Experiment config JSON");
  bench_cmd->add_option("--replicates", bench.replicates_override,
                        "Override the replicate count");
  auto* seed_opt = bench_cmd->add_option("--seed", bench.seed_override, "Override the seed");
  bench_cmd->add_option("--out", bench.out, "Report JSON path ('-' for stdout)");

  PipelineArgs scree_args;
  std::string scree_features = "b";
  int scree_max_candidates = 0;
  auto* scree = app.add_subcommand("scree", "Singular value profiles for elbow picks");
  add_pipeline_flags(scree, scree_args, false);
  scree->add_option("--features", scree_features,
                    "a (adjacency rows), b (per-layer estimates) or bavg");
  scree->add_option("--max-candidates", scree_max_candidates, "Elbow search cap");

  try {
    app.parse(argc, argv);
    bench.has_seed_override = seed_opt->count() > 0;
    if (simulate->parsed()) return run_simulate(sim);
    if (estimate->parsed()) return run_estimate(est, false);
    if (multi->parsed()) return run_multi(multi_args, b_out_dir);
    if (cv->parsed()) return run_estimate(cv_args, true);
    if (bench_cmd->parsed()) return run_bench(bench);
    if (scree->parsed()) return run_scree(scree_args, scree_features, scree_max_candidates);
    std::cerr << app.help() << "\n";
    return 1;
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
