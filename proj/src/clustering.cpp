#include "netblock/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "netblock/errors.hpp"
#include "netblock/numerics.hpp"
#include "netblock/parallel.hpp"
#include "netblock/rng.hpp"

namespace netblock {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int nearest_center(const Eigen::MatrixXd& centers, const Eigen::RowVectorXd& x) {
  int best = 0;
  double bestd = (centers.row(0) - x).squaredNorm();
  for (int k = 1; k < centers.rows(); ++k) {
    const double d = (centers.row(k) - x).squaredNorm();
    if (d < bestd) {
      bestd = d;
      best = k;
    }
  }
  return best;
}

KmeansResult kmeans_once(const Eigen::MatrixXd& points, int K, std::uint64_t seed) {
  const int m = static_cast<int>(points.rows());
  const int p = static_cast<int>(points.cols());
  Rng rng(seed);
  Eigen::MatrixXd centers(K, p);

  // k-means++ seeding.
  centers.row(0) = points.row(static_cast<int>(rng.uniform_below(m)));
  Eigen::VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < K; ++c) {
    const double total = d2.sum();
    int pick;
    if (total <= 0.0) {
      pick = static_cast<int>(rng.uniform_below(m));
    } else {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = m - 1;
      for (int i = 0; i < m; ++i) {
        acc += d2(i);
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    }
    centers.row(c) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> labels(m, 0);
  std::vector<int> counts(K, 0);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<int> next(m);
    for (int i = 0; i < m; ++i) next[i] = nearest_center(centers, points.row(i));
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < m; ++i) ++counts[next[i]];
    // Re-seed empty clusters with the point farthest from its center.
    for (int k = 0; k < K; ++k) {
      if (counts[k] > 0) continue;
      int far = -1;
      double fard = -1.0;
      for (int i = 0; i < m; ++i) {
        if (counts[next[i]] <= 1) continue;
        const double d = (points.row(i) - centers.row(next[i])).squaredNorm();
        if (d > fard) {
          fard = d;
          far = i;
        }
      }
      if (far < 0) break;  // duplicates everywhere; leave the cluster empty
      --counts[next[far]];
      next[far] = k;
      ++counts[k];
    }
    for (int k = 0; k < K; ++k) {
      if (counts[k] == 0) continue;
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(p);
      for (int i = 0; i < m; ++i)
        if (next[i] == k) mean += points.row(i);
      centers.row(k) = mean / counts[k];
    }
    const bool stable = (iter > 0 && next == labels);
    labels = std::move(next);
    if (stable) break;
  }

  KmeansResult out;
  out.labels = labels;
  for (int i = 0; i < m; ++i)
    out.wcss += (points.row(i) - centers.row(labels[i])).squaredNorm();
  std::fill(counts.begin(), counts.end(), 0);
  for (int i = 0; i < m; ++i) ++counts[labels[i]];
  bool duplicate_center = false;
  for (int a = 0; a < K && !duplicate_center; ++a)
    for (int b = a + 1; b < K && !duplicate_center; ++b)
      if (counts[a] > 0 && counts[b] > 0 && centers.row(a) == centers.row(b))
        duplicate_center = true;
  out.degenerate =
      duplicate_center || std::count(counts.begin(), counts.end(), 0) > 0;
  return out;
}

struct GmmModel {
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;  // K x p
  Eigen::MatrixXd vars;   // K x p, diagonal covariances
};

GmmResult gmm_once(const Eigen::MatrixXd& points, int K, std::uint64_t seed,
                   std::vector<double>* loglik_path) {
  const int m = static_cast<int>(points.rows());
  const int p = static_cast<int>(points.cols());

  Eigen::RowVectorXd overall_var(p);
  {
    const Eigen::RowVectorXd mu = points.colwise().mean();
    overall_var =
        (points.rowwise() - mu).array().square().colwise().sum() / std::max(m - 1, 1);
  }
  Eigen::RowVectorXd floor(p);
  for (int d = 0; d < p; ++d)
    floor(d) = overall_var(d) > 0.0 ? 1e-8 * overall_var(d) : 1e-12;

  const KmeansResult init = kmeans_once(points, K, seed);
  GmmModel model;
  model.weights = Eigen::VectorXd::Constant(K, 1.0 / K);
  model.means.resize(K, p);
  model.vars.resize(K, p);
  for (int k = 0; k < K; ++k) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(p);
    int count = 0;
    for (int i = 0; i < m; ++i)
      if (init.labels[i] == k) {
        mean += points.row(i);
        ++count;
      }
    if (count == 0) {
      model.means.row(k) = points.row(k % m);
      model.vars.row(k) = overall_var.cwiseMax(floor);
      model.weights(k) = 1e-10;
      continue;
    }
    mean /= count;
    Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(p);
    for (int i = 0; i < m; ++i)
      if (init.labels[i] == k) var += (points.row(i) - mean).array().square().matrix();
    var /= count;
    model.means.row(k) = mean;
    model.vars.row(k) = var.cwiseMax(floor);
    model.weights(k) = static_cast<double>(count) / m;
  }
  model.weights /= model.weights.sum();

  Eigen::MatrixXd logresp(m, K);
  double loglik = -kInf;
  constexpr double kLog2Pi = 1.8378770664093453;
  for (int iter = 0; iter < 200; ++iter) {
    for (int k = 0; k < K; ++k) {
      const double logw = std::log(std::max(model.weights(k), 1e-300));
      double logdet = 0.0;
      for (int d = 0; d < p; ++d) logdet += std::log(model.vars(k, d));
      const Eigen::ArrayXXd diff =
          (points.rowwise() - model.means.row(k)).array().square();
      const Eigen::ArrayXd quad =
          (diff.rowwise() / model.vars.row(k).array()).rowwise().sum();
      logresp.col(k) =
          (logw - 0.5 * (p * kLog2Pi + logdet) - 0.5 * quad).matrix();
    }
    Eigen::VectorXd lse(m);
    for (int i = 0; i < m; ++i) {
      const double mx = logresp.row(i).maxCoeff();
      lse(i) = mx + std::log((logresp.row(i).array() - mx).exp().sum());
    }
    const double new_loglik = lse.sum();
    if (loglik_path) loglik_path->push_back(new_loglik);
    const bool converged =
        iter > 0 && std::abs(new_loglik - loglik) <= 1e-10 * (1.0 + std::abs(loglik));
    loglik = new_loglik;
    for (int i = 0; i < m; ++i)
      logresp.row(i) = (logresp.row(i).array() - lse(i)).exp().matrix();
    if (converged) break;

    int collapsed = 0;
    for (int k = 0; k < K; ++k) {
      const double Nk = logresp.col(k).sum();
      if (Nk < 1e-12) {
        ++collapsed;
        model.weights(k) = 1e-300;
        continue;
      }
      model.weights(k) = Nk / m;
      const Eigen::RowVectorXd mean = (logresp.col(k).transpose() * points) / Nk;
      Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(p);
      for (int i = 0; i < m; ++i)
        var += logresp(i, k) * (points.row(i) - mean).array().square().matrix();
      model.means.row(k) = mean;
      model.vars.row(k) = (var / Nk).cwiseMax(floor);
    }
    if (collapsed == K)
      throw NumericalError("gmm: all mixture components collapsed");
    model.weights /= model.weights.sum();
  }

  GmmResult out;
  out.log_likelihood = loglik;
  out.labels.resize(m);
  for (int i = 0; i < m; ++i) {
    int best = 0;
    for (int k = 1; k < K; ++k)
      if (logresp(i, k) > logresp(i, best)) best = k;
    out.labels[i] = best;
  }
  std::set<int> distinct(out.labels.begin(), out.labels.end());
  out.degenerate = static_cast<int>(distinct.size()) < K;
  return out;
}

void check_points(const Eigen::MatrixXd& points, int K, const char* who) {
  if (K < 1) throw DataError(std::string(who) + ": K must be at least 1");
  if (points.rows() < K)
    throw DataError(std::string(who) + ": fewer points than clusters");
  if (points.cols() < 1) throw DataError(std::string(who) + ": empty feature matrix");
  if (!points.allFinite())
    throw NumericalError(std::string(who) + ": non-finite features");
}

// Minimum-cost perfect assignment via shortest augmenting paths (O(K^3)).
std::vector<int> hungarian_min(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, 0);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) assignment[p[j] - 1] = j - 1;
  return assignment;
}

}  // namespace

KmeansResult kmeans(const Eigen::MatrixXd& points, int K, std::uint64_t seed,
                    int restarts) {
  check_points(points, K, "kmeans");
  if (restarts < 1) throw DataError("kmeans: restarts must be at least 1");
  std::vector<KmeansResult> runs(restarts);
  parallel_for(static_cast<std::size_t>(restarts), [&](std::size_t r) {
    runs[r] = kmeans_once(points, K, derive_seed(seed, r));
  });
  int best = 0;
  for (int r = 1; r < restarts; ++r)
    if (runs[r].wcss < runs[best].wcss) best = r;
  return runs[best];
}

GmmResult gmm_cluster(const Eigen::MatrixXd& points, int K, std::uint64_t seed,
                      int restarts) {
  check_points(points, K, "gmm");
  if (restarts < 1) throw DataError("gmm: restarts must be at least 1");
  std::vector<GmmResult> runs(restarts);
  parallel_for(static_cast<std::size_t>(restarts), [&](std::size_t r) {
    runs[r] = gmm_once(points, K, derive_seed(seed, r), nullptr);
  });
  int best = 0;
  for (int r = 1; r < restarts; ++r)
    if (runs[r].log_likelihood > runs[best].log_likelihood) best = r;
  return runs[best];
}

GmmResult gmm_cluster_traced(const Eigen::MatrixXd& points, int K,
                             std::uint64_t seed, std::vector<double>& loglik_path) {
  check_points(points, K, "gmm");
  return gmm_once(points, K, seed, &loglik_path);
}

ClusterAssignment spectral_cluster(const AveragedAdjacency& Y, int K, int embed_dim,
                                   ClusterEngine engine, std::uint64_t seed,
                                   bool scale_by_eigenvalues, int restarts) {
  if (K < 1 || K > Y.n()) throw DataError("spectral_cluster: K out of range");
  if (embed_dim < 1 || embed_dim > Y.n())
    throw DataError("spectral_cluster: embedding dimension out of range");
  const SpectrumResult top =
      sym_eig_topk(Y.dense(), embed_dim, EigOrder::by_magnitude);
  Eigen::MatrixXd feats = top.vectors;
  if (scale_by_eigenvalues) feats = feats * top.values.asDiagonal();

  ClusterAssignment out;
  out.K = K;
  out.features = (scale_by_eigenvalues ? "ULambda(dim=" : "U(dim=") +
                 std::to_string(embed_dim) + ")";
  if (engine == ClusterEngine::kmeans) {
    KmeansResult r = kmeans(feats, K, seed, restarts);
    out.labels = std::move(r.labels);
    out.degenerate = r.degenerate;
    out.method = "spectral+kmeans";
  } else {
    GmmResult r = gmm_cluster(feats, K, seed, restarts);
    out.labels = std::move(r.labels);
    out.degenerate = r.degenerate;
    out.method = "spectral+gmm";
  }
  return out;
}

Eigen::MatrixXd bias_adjusted_matrix(const NetworkSample& sample) {
  const int n = sample.n();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (const BinaryLayer& layer : sample.layers()) {
    const auto nbrs = layer.neighbor_lists();
    for (int t = 0; t < n; ++t) {
      const auto& nb = nbrs[t];
      for (std::size_t a = 0; a < nb.size(); ++a)
        for (std::size_t b = 0; b < nb.size(); ++b) S(nb[a], nb[b]) += 1.0;
    }
    const std::vector<int> deg = layer.degrees();
    for (int i = 0; i < n; ++i) S(i, i) -= deg[i];
  }
  return S;
}

ClusterAssignment bias_adjusted_spectral(const NetworkSample& sample, int K,
                                         ClusterEngine engine, std::uint64_t seed,
                                         int restarts) {
  if (K < 1 || K > sample.n())
    throw DataError("bias_adjusted_spectral: K out of range");
  const Eigen::MatrixXd S = bias_adjusted_matrix(sample);
  const SpectrumResult top = sym_eig_topk(S, K, EigOrder::by_magnitude);

  ClusterAssignment out;
  out.K = K;
  out.features = "U(bias-adjusted,dim=" + std::to_string(K) + ")";
  if (engine == ClusterEngine::kmeans) {
    KmeansResult r = kmeans(top.vectors, K, seed, restarts);
    out.labels = std::move(r.labels);
    out.degenerate = r.degenerate;
    out.method = "bias-adjusted+kmeans";
  } else {
    GmmResult r = gmm_cluster(top.vectors, K, seed, restarts);
    out.labels = std::move(r.labels);
    out.degenerate = r.degenerate;
    out.method = "bias-adjusted+gmm";
  }
  return out;
}

std::pair<std::vector<int>, double> best_agreement_permutation(
    const Eigen::MatrixXd& confusion) {
  const int K = static_cast<int>(confusion.rows());
  if (confusion.cols() != K) throw DataError("alignment: confusion must be square");
  if (K <= 8) {
    std::vector<int> perm(K), best(K);
    std::iota(perm.begin(), perm.end(), 0);
    best = perm;
    double best_agree = -1.0;
    do {
      double agree = 0.0;
      for (int k = 0; k < K; ++k) agree += confusion(k, perm[k]);
      if (agree > best_agree) {
        best_agree = agree;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {best, best_agree};
  }
  const double mx = confusion.maxCoeff();
  const std::vector<int> perm =
      hungarian_min((Eigen::MatrixXd::Constant(K, K, mx) - confusion).eval());
  double agree = 0.0;
  for (int k = 0; k < K; ++k) agree += confusion(k, perm[k]);
  return {perm, agree};
}

AlignmentResult align_labels(const std::vector<int>& g_hat, const std::vector<int>& g,
                             int K) {
  if (g_hat.size() != g.size())
    throw DataError("align_labels: label vectors differ in length");
  if (g_hat.empty()) throw DataError("align_labels: empty labels");
  Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(K, K);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g_hat[i] < 0 || g_hat[i] >= K || g[i] < 0 || g[i] >= K)
      throw DataError("align_labels: label out of range");
    confusion(g_hat[i], g[i]) += 1.0;
  }
  auto [perm, agree] = best_agreement_permutation(confusion);
  AlignmentResult out;
  out.permutation = perm;
  out.misclustering_rate = 1.0 - agree / static_cast<double>(g.size());
  out.aligned.resize(g_hat.size());
  for (std::size_t i = 0; i < g_hat.size(); ++i) out.aligned[i] = perm[g_hat[i]];
  return out;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size())
    throw DataError("ari: label vectors differ in length");
  if (a.size() < 2) throw DataError("ari: need at least two items");
  const int Ka = *std::max_element(a.begin(), a.end()) + 1;
  const int Kb = *std::max_element(b.begin(), b.end()) + 1;
  if (*std::min_element(a.begin(), a.end()) < 0 ||
      *std::min_element(b.begin(), b.end()) < 0)
    throw DataError("ari: labels must be nonnegative");
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(Ka, Kb);
  for (std::size_t i = 0; i < a.size(); ++i) C(a[i], b[i]) += 1.0;
  auto comb2 = [](double x) { return 0.5 * x * (x - 1.0); };
  double sum_ij = 0.0;
  for (int i = 0; i < Ka; ++i)
    for (int j = 0; j < Kb; ++j) sum_ij += comb2(C(i, j));
  double sum_a = 0.0, sum_b = 0.0;
  for (int i = 0; i < Ka; ++i) sum_a += comb2(C.row(i).sum());
  for (int j = 0; j < Kb; ++j) sum_b += comb2(C.col(j).sum());
  const double total = comb2(static_cast<double>(a.size()));
  const double expected = sum_a * sum_b / total;
  const double maximum = 0.5 * (sum_a + sum_b);
  if (maximum == expected) return 1.0;
  return (sum_ij - expected) / (maximum - expected);
}

}  // namespace netblock
