#pragma once

#include <cstdint>
#include <vector>

#include "netblock/admm.hpp"
#include "netblock/graph.hpp"
#include "netblock/types.hpp"

namespace netblock {

enum class CvMode { mfold, repeated };

struct CvSplit {
  std::vector<int> train;
  std::vector<int> validation;
};

struct CvPlan {
  CvMode mode = CvMode::mfold;
  int M = 0;  // fold count (mfold only)
  std::vector<CvSplit> splits;
  std::uint64_t seed = 0;
};

/// Random partition of [0..L) into M folds whose sizes differ by at most one
/// (the first L mod M folds take the remainder). Each fold serves once as the
/// validation set with the complement as training data.
CvPlan mfold_plan(int L, int M, std::uint64_t seed);

/// All C(L, train_size) train/validation partitions when that count is at
/// most 64, otherwise 64 distinct combinations sampled without replacement.
CvPlan repeated_splits(int L, int train_size, std::uint64_t seed);

/// Geometric grid from floor_ratio * lambda_max up to lambda_max inclusive,
/// ascending (the warm-start order).
std::vector<double> make_lambda_grid(const AveragedAdjacency& Y,
                                     const MembershipMatrix& Z, int count = 50,
                                     double floor_ratio = 1e-4,
                                     Scaling scaling = Scaling::per_node);
std::vector<double> make_lambda_grid_from_max(double lambda_max_value, int count,
                                              double floor_ratio);

struct CvReport {
  std::vector<double> lambdas;
  Eigen::MatrixXd per_split_loss;  // splits x lambdas
  std::vector<double> total_loss;
  int selected_index = 0;
  double selected_lambda = 0.0;
  SolveResult refit;  // on all layers at the selected lambda
  CvMode mode = CvMode::mfold;
};

/// For every split: fit the lambda path on the training average, score
/// ||A_validation - Z W_rho Z^T||_F^2, sum losses over splits, pick the
/// minimizing lambda (ties toward the larger value) and refit on all layers.
CvReport cross_validate(const NetworkSample& sample, const MembershipMatrix& Z,
                        const CvPlan& plan, const std::vector<double>& lambdas,
                        const AdmmConfig& cfg);

}  // namespace netblock
