#include "netblock/multilayer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "netblock/errors.hpp"
#include "netblock/numerics.hpp"
#include "netblock/parallel.hpp"
#include "netblock/rng.hpp"
#include "netblock/sampler.hpp"

namespace netblock {

namespace {

// Upper-triangular (including diagonal) vectorization of a symmetric matrix,
// ordered (0,0),(0,1),...,(1,1),(1,2),...
Eigen::RowVectorXd upper_tri_row(const Eigen::MatrixXd& M) {
  const int K = static_cast<int>(M.rows());
  Eigen::RowVectorXd row(K * (K + 1) / 2);
  int c = 0;
  for (int i = 0; i < K; ++i)
    for (int j = i; j < K; ++j) row(c++) = M(i, j);
  return row;
}

std::size_t intersection_size(const std::vector<Edge>& a, const std::vector<Edge>& b) {
  std::size_t count = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

Eigen::MatrixXd layer_features(const NetworkSample& sample,
                               const MembershipMatrix& Z, double rho,
                               LayerFeatureLevel level) {
  const int L = sample.L();
  if (level == LayerFeatureLevel::per_layer_B) {
    if (Z.min_community_size() < 1)
      throw DataError("layer features: empty community");
    const int K = Z.K();
    Eigen::MatrixXd G(L, K * (K + 1) / 2);
    parallel_for(static_cast<std::size_t>(L), [&](std::size_t l) {
      const AveragedAdjacency single =
          AveragedAdjacency::average(sample, std::vector<int>{static_cast<int>(l)});
      G.row(static_cast<int>(l)) =
          upper_tri_row(averaging_estimator(single, Z, rho).B_hat.entries());
    });
    return G;
  }
  const int n = sample.n();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(L, static_cast<long>(n) * (n + 1) / 2);
  for (int l = 0; l < L; ++l) {
    for (const Edge& e : sample.layers()[l].edges()) {
      // position of (i,j), i <= j, in the row-major upper triangle
      const long i = e.i, j = e.j;
      G(l, i * n - i * (i - 1) / 2 + (j - i)) = 1.0;
    }
  }
  return G;
}

Eigen::VectorXd layer_feature_singular_values(const NetworkSample& sample,
                                              const MembershipMatrix* Z, double rho,
                                              LayerFeatureLevel level) {
  if (level == LayerFeatureLevel::per_layer_B) {
    if (!Z) throw DataError("layer features: membership required for B-level rows");
    return svd_full(layer_features(sample, *Z, rho, level)).singular_values;
  }
  // Binary rows: the Gram matrix counts shared edges.
  const int L = sample.L();
  Eigen::MatrixXd gram(L, L);
  for (int a = 0; a < L; ++a) {
    for (int b = a; b < L; ++b) {
      const double g = static_cast<double>(intersection_size(
          sample.layers()[a].edges(), sample.layers()[b].edges()));
      gram(a, b) = g;
      gram(b, a) = g;
    }
  }
  Eigen::VectorXd ev = sym_eig_topk(gram, L, EigOrder::by_value).values;
  for (int i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), 0.0));
  return ev;
}

LayerGrouping cluster_layers(const Eigen::MatrixXd& features, int L_tilde,
                             ClusterEngine engine, std::uint64_t seed, int restarts) {
  const int L = static_cast<int>(features.rows());
  if (L_tilde < 1 || L_tilde > L)
    throw DataError("cluster_layers: group count out of range");
  std::vector<int> labels;
  if (L_tilde == 1) {
    labels.assign(L, 0);
  } else if (engine == ClusterEngine::kmeans) {
    labels = kmeans(features, L_tilde, seed, restarts).labels;
  } else {
    labels = gmm_cluster(features, L_tilde, seed, restarts).labels;
  }
  LayerGrouping grouping;
  grouping.L = L;
  grouping.L_tilde = L_tilde;
  grouping.group_of = labels;
  grouping.groups.assign(L_tilde, {});
  for (int l = 0; l < L; ++l) grouping.groups[labels[l]].push_back(l);
  for (int g = 0; g < L_tilde; ++g) {
    if (grouping.groups[g].empty())
      throw DataError("cluster_layers: group " + std::to_string(g + 1) +
                      " is empty; the requested group count is too large");
  }
  return grouping;
}

ScreeResult estimate_l_tilde_from_sigma(const Eigen::VectorXd& sigma,
                                        int max_candidates) {
  const int count = static_cast<int>(sigma.size());
  if (count < 2) throw DataError("scree: need at least two singular values");
  if (sigma(0) <= 0.0) throw DataError("scree: all-zero feature matrix");
  const int jmax = std::min(max_candidates, count - 1);
  if (jmax < 1) throw DataError("scree: max_candidates out of range");
  const double zero_tol = 1e-12 * sigma(0);
  int best = 1;
  double best_ratio = -1.0;
  for (int j = 1; j <= jmax; ++j) {
    if (sigma(j - 1) <= zero_tol) break;  // spectrum already vanished
    if (sigma(j) <= zero_tol) return {j, sigma};  // exact tail of zeros
    const double ratio = sigma(j - 1) / sigma(j);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = j;
    }
  }
  return {best, sigma};
}

ScreeResult estimate_l_tilde(const Eigen::MatrixXd& features, int max_candidates) {
  return estimate_l_tilde_from_sigma(svd_full(features).singular_values,
                                     max_candidates);
}

double between_layer_error(const LayerGrouping& grouping,
                           const std::vector<int>& truth) {
  if (static_cast<int>(truth.size()) != grouping.L)
    throw DataError("between_layer_error: truth length must equal L");
  int truth_groups = 0;
  for (int g : truth) {
    if (g < 0) throw DataError("between_layer_error: negative group label");
    truth_groups = std::max(truth_groups, g + 1);
  }
  if (truth_groups != grouping.L_tilde)
    throw DataError("between_layer_error: group counts differ (" +
                    std::to_string(truth_groups) + " vs " +
                    std::to_string(grouping.L_tilde) + ")");
  Eigen::MatrixXd confusion =
      Eigen::MatrixXd::Zero(grouping.L_tilde, grouping.L_tilde);
  for (int l = 0; l < grouping.L; ++l)
    confusion(grouping.group_of[l], truth[l]) += 1.0;
  const auto [perm, agreement] = best_agreement_permutation(confusion);
  (void)perm;
  return (static_cast<double>(grouping.L) - agreement) /
         static_cast<double>(grouping.L);
}

MultiResult multisbm_estimate(const NetworkSample& sample, int K,
                              const MultiOptions& opts) {
  if (sample.L() < 2)
    throw DataError("multisbm: at least two layers required");
  MultiResult out;
  out.membership =
      bias_adjusted_spectral(sample, K, opts.engine, opts.seed, opts.restarts);
  const MembershipMatrix Z(out.membership.labels, K);

  const Eigen::MatrixXd feats =
      layer_features(sample, Z, sample.rho(), LayerFeatureLevel::per_layer_B);
  int l_tilde;
  if (opts.l_tilde) {
    l_tilde = *opts.l_tilde;
  } else {
    const ScreeResult scree = estimate_l_tilde(
        feats, static_cast<int>(std::min(feats.rows(), feats.cols())) - 1);
    l_tilde = scree.l_tilde;
    out.estimated_l_tilde = l_tilde;
  }
  out.grouping = cluster_layers(feats, l_tilde, opts.engine,
                                derive_seed(opts.seed, 1), opts.restarts);

  out.groups.resize(l_tilde);
  std::vector<int> multi_groups;
  for (int g = 0; g < l_tilde; ++g)
    if (out.grouping.groups[g].size() >= 2 || opts.fixed_lambda)
      multi_groups.push_back(g);

  parallel_for(multi_groups.size(), [&](std::size_t gi) {
    const int g = multi_groups[gi];
    const std::vector<int>& layers = out.grouping.groups[g];
    const NetworkSample sub = sample.subset(layers);
    GroupEstimate est;
    est.layers = layers;
    if (opts.fixed_lambda) {
      AdmmConfig cfg = opts.admm;
      cfg.lambda = *opts.fixed_lambda;
      est.solve = admm_solve(AveragedAdjacency::average(sub), Z, sub.rho(), cfg);
      est.lambda = cfg.lambda;
      est.no_cv = true;
    } else {
      const std::vector<double> grid =
          make_lambda_grid(AveragedAdjacency::average(sub), Z, opts.grid_count,
                           opts.grid_floor, opts.admm.scaling);
      const CvPlan plan = mfold_plan(sub.L(), std::min(opts.folds, sub.L()),
                                     derive_seed(opts.seed, 100 + g));
      CvReport report = cross_validate(sub, Z, plan, grid, opts.admm);
      est.lambda = report.selected_lambda;
      est.solve = std::move(report.refit);
    }
    out.groups[g] = std::move(est);
  });

  // Single-layer groups cannot be cross-validated; borrow the median of the
  // selected penalties and flag the estimate.
  if (!opts.fixed_lambda) {
    std::vector<double> picked;
    for (int g : multi_groups) picked.push_back(out.groups[g].lambda);
    for (int g = 0; g < l_tilde; ++g) {
      if (out.grouping.groups[g].size() >= 2) continue;
      if (picked.empty())
        throw DataError(
            "multisbm: every group has a single layer; pass an explicit lambda");
      AdmmConfig cfg = opts.admm;
      cfg.lambda = median(picked);
      GroupEstimate est;
      est.layers = out.grouping.groups[g];
      est.solve = admm_solve(
          AveragedAdjacency::average(sample.subset(est.layers)), Z, sample.rho(), cfg);
      est.lambda = cfg.lambda;
      est.no_cv = true;
      out.groups[g] = std::move(est);
    }
  }

  if (sample.group_labels())
    out.between_layer_err = between_layer_error(out.grouping, *sample.group_labels());
  return out;
}

ReestimateResult reestimate_pipeline(const NetworkSample& sample, int K,
                                     const ReestimateOptions& opts) {
  if (sample.L() < 2)
    throw DataError("reestimate: at least two layers required for CV");
  const AveragedAdjacency avg = AveragedAdjacency::average(sample);

  ReestimateResult out;
  out.initial = spectral_cluster(avg, K, K, ClusterEngine::kmeans, opts.seed, true,
                                 opts.restarts);
  const MembershipMatrix Z_K(out.initial.labels, K);

  const std::vector<double> grid =
      make_lambda_grid(avg, Z_K, opts.grid_count, opts.grid_floor, opts.admm.scaling);
  const CvPlan plan =
      mfold_plan(sample.L(), std::min(opts.folds, sample.L()), derive_seed(opts.seed, 1));
  out.cv = cross_validate(sample, Z_K, plan, grid, opts.admm);
  out.d_hat = out.cv.refit.d_hat;

  const int embed = std::max(1, out.d_hat);
  if (out.d_hat != K) {
    out.final_assignment = spectral_cluster(avg, K, embed, ClusterEngine::kmeans,
                                            derive_seed(opts.seed, 2), true,
                                            opts.restarts);
    out.reclustered = true;
  } else {
    out.final_assignment = out.initial;
  }
  const MembershipMatrix Z_d(out.final_assignment.labels, K);
  out.final_B = avg_lowrank(avg, Z_d, sample.rho(), embed);
  return out;
}

}  // namespace netblock
