#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "netblock/graph.hpp"
#include "netblock/types.hpp"

namespace netblock {

enum class ClusterEngine { gmm, kmeans };

struct ClusterAssignment {
  std::vector<int> labels;  // 0-based
  int K = 0;
  std::string method;
  std::string features;
  bool degenerate = false;  // fewer than K distinct labels in the result
};

struct KmeansResult {
  std::vector<int> labels;
  double wcss = 0.0;
  bool degenerate = false;
};

/// Lloyd iterations with k-means++ seeding; best of `restarts` runs by
/// within-cluster sum of squares, deterministic given the seed.
KmeansResult kmeans(const Eigen::MatrixXd& points, int K, std::uint64_t seed,
                    int restarts = 10);

struct GmmResult {
  std::vector<int> labels;
  double log_likelihood = 0.0;
  bool degenerate = false;
};

/// EM for a K-component Gaussian mixture with diagonal covariances,
/// k-means initialization and hard assignment by maximum posterior; best of
/// `restarts` runs by log-likelihood.
GmmResult gmm_cluster(const Eigen::MatrixXd& points, int K, std::uint64_t seed,
                      int restarts = 10);

/// Single EM run that records the log-likelihood after every E step.
GmmResult gmm_cluster_traced(const Eigen::MatrixXd& points, int K,
                             std::uint64_t seed, std::vector<double>& loglik_path);

/// Spectral clustering on the averaged adjacency: rows of U Lambda (the
/// leading-by-magnitude eigenpairs, eigenvalue-scaled) clustered into K
/// groups. scale_by_eigenvalues=false clusters the raw eigenvector rows.
ClusterAssignment spectral_cluster(const AveragedAdjacency& Y, int K, int embed_dim,
                                   ClusterEngine engine, std::uint64_t seed,
                                   bool scale_by_eigenvalues = true,
                                   int restarts = 10);

/// sum_l [(A^(l))^2 - diag(A^(l) 1)], the debiased squared adjacency
/// aggregate used for multilayer membership estimation.
Eigen::MatrixXd bias_adjusted_matrix(const NetworkSample& sample);

/// Clusters the rows of the K leading eigenvectors of the bias-adjusted
/// aggregate (unscaled rows).
ClusterAssignment bias_adjusted_spectral(const NetworkSample& sample, int K,
                                         ClusterEngine engine, std::uint64_t seed,
                                         int restarts = 10);

struct AlignmentResult {
  std::vector<int> permutation;  // relabeling applied to g_hat
  double misclustering_rate = 0.0;
  std::vector<int> aligned;  // permutation applied to g_hat
};

/// Minimum-Hamming-distance relabeling of g_hat against g: exhaustive over
/// the K! permutations for K <= 8, otherwise an exact maximum-agreement
/// assignment on the K x K confusion matrix.
AlignmentResult align_labels(const std::vector<int>& g_hat, const std::vector<int>& g,
                             int K);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

/// Permutation maximizing the trace of a nonnegative confusion matrix;
/// returns (permutation, agreement). Shared by label alignment and
/// between-layer error.
std::pair<std::vector<int>, double> best_agreement_permutation(
    const Eigen::MatrixXd& confusion);

}  // namespace netblock
