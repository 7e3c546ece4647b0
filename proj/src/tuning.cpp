#include "netblock/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "netblock/errors.hpp"
#include "netblock/parallel.hpp"
#include "netblock/rng.hpp"

namespace netblock {

namespace {

std::vector<int> sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// C(L, t) capped at `cap` to avoid overflow; exact when below the cap.
std::uint64_t binomial_capped(int L, int t, std::uint64_t cap) {
  t = std::min(t, L - t);
  std::uint64_t result = 1;
  for (int i = 1; i <= t; ++i) {
    result = result * static_cast<std::uint64_t>(L - t + i) / static_cast<std::uint64_t>(i);
    if (result > cap) return cap + 1;
  }
  return result;
}

void enumerate_combinations(int L, int t, std::vector<std::vector<int>>& out) {
  std::vector<int> combo(t);
  for (int i = 0; i < t; ++i) combo[i] = i;
  while (true) {
    out.push_back(combo);
    int pos = t - 1;
    while (pos >= 0 && combo[pos] == L - t + pos) --pos;
    if (pos < 0) break;
    ++combo[pos];
    for (int i = pos + 1; i < t; ++i) combo[i] = combo[i - 1] + 1;
  }
}

}  // namespace

CvPlan mfold_plan(int L, int M, std::uint64_t seed) {
  if (L < 2) throw DataError("cv: at least two layers required for M-fold CV");
  if (M < 2 || M > L)
    throw DataError("cv: fold count must lie in [2, L]; got M=" + std::to_string(M) +
                    " with L=" + std::to_string(L));
  std::vector<int> order(L);
  for (int l = 0; l < L; ++l) order[l] = l;
  Rng rng(seed);
  for (int i = L - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[i], order[j]);
  }
  CvPlan plan;
  plan.mode = CvMode::mfold;
  plan.M = M;
  plan.seed = seed;
  const int base = L / M;
  const int extra = L % M;
  int cursor = 0;
  std::vector<std::vector<int>> folds(M);
  for (int m = 0; m < M; ++m) {
    const int size = base + (m < extra ? 1 : 0);
    folds[m].assign(order.begin() + cursor, order.begin() + cursor + size);
    cursor += size;
  }
  for (int m = 0; m < M; ++m) {
    CvSplit split;
    split.validation = sorted(folds[m]);
    for (int other = 0; other < M; ++other) {
      if (other == m) continue;
      split.train.insert(split.train.end(), folds[other].begin(), folds[other].end());
    }
    split.train = sorted(std::move(split.train));
    plan.splits.push_back(std::move(split));
  }
  return plan;
}

CvPlan repeated_splits(int L, int train_size, std::uint64_t seed) {
  if (train_size < 1 || train_size >= L)
    throw DataError("cv: train size must lie in [1, L-1]");
  constexpr std::uint64_t kMaxSplits = 64;
  CvPlan plan;
  plan.mode = CvMode::repeated;
  plan.seed = seed;
  std::vector<std::vector<int>> combos;
  if (binomial_capped(L, train_size, kMaxSplits) <= kMaxSplits) {
    enumerate_combinations(L, train_size, combos);
  } else {
    Rng rng(seed);
    std::set<std::vector<int>> seen;
    std::vector<int> pool(L);
    while (seen.size() < kMaxSplits) {
      for (int l = 0; l < L; ++l) pool[l] = l;
      for (int i = 0; i < train_size; ++i) {
        const int j = i + static_cast<int>(rng.uniform_below(
                              static_cast<std::uint64_t>(L - i)));
        std::swap(pool[i], pool[j]);
      }
      std::vector<int> combo(pool.begin(), pool.begin() + train_size);
      std::sort(combo.begin(), combo.end());
      if (seen.insert(combo).second) combos.push_back(std::move(combo));
    }
  }
  for (const auto& combo : combos) {
    CvSplit split;
    split.train = combo;
    std::size_t c = 0;
    for (int l = 0; l < L; ++l) {
      if (c < combo.size() && combo[c] == l) {
        ++c;
      } else {
        split.validation.push_back(l);
      }
    }
    plan.splits.push_back(std::move(split));
  }
  return plan;
}

std::vector<double> make_lambda_grid_from_max(double lambda_max_value, int count,
                                              double floor_ratio) {
  if (count < 2) throw DataError("lambda grid: need at least two points");
  if (!(floor_ratio > 0.0 && floor_ratio < 1.0))
    throw DataError("lambda grid: floor ratio must lie in (0,1)");
  if (!(lambda_max_value > 0.0))
    throw DataError("lambda grid: lambda_max is zero (all-zero input)");
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    grid[i] = lambda_max_value * std::pow(floor_ratio, 1.0 - t);
  }
  grid.back() = lambda_max_value;
  return grid;
}

std::vector<double> make_lambda_grid(const AveragedAdjacency& Y,
                                     const MembershipMatrix& Z, int count,
                                     double floor_ratio, Scaling scaling) {
  return make_lambda_grid_from_max(lambda_max(Y, Z, scaling), count, floor_ratio);
}

CvReport cross_validate(const NetworkSample& sample, const MembershipMatrix& Z,
                        const CvPlan& plan, const std::vector<double>& lambdas,
                        const AdmmConfig& cfg) {
  if (plan.splits.empty()) throw DataError("cv: plan has no splits");
  if (lambdas.empty()) throw DataError("cv: empty lambda grid");
  if (sample.L() < 2) throw DataError("cv: at least two layers required");
  const int S = static_cast<int>(plan.splits.size());
  const int J = static_cast<int>(lambdas.size());

  CvReport report;
  report.lambdas = lambdas;
  report.mode = plan.mode;
  report.per_split_loss.resize(S, J);

  parallel_for(static_cast<std::size_t>(S), [&](std::size_t s) {
    const CvSplit& split = plan.splits[s];
    if (split.train.empty() || split.validation.empty())
      throw DataError("cv: split with empty train or validation set");
    const BlockTarget train =
        compress(AveragedAdjacency::average(sample, split.train), Z);
    const BlockTarget val =
        compress(AveragedAdjacency::average(sample, split.validation), Z);
    const std::vector<SolveResult> path = solve_path(train, sample.rho(), lambdas, cfg);
    for (int j = 0; j < J; ++j)
      report.per_split_loss(static_cast<int>(s), j) = residual_frob2(val, path[j].W_rho);
  });

  report.total_loss.assign(J, 0.0);
  for (int s = 0; s < S; ++s)
    for (int j = 0; j < J; ++j) report.total_loss[j] += report.per_split_loss(s, j);

  // Ties break toward the larger lambda (stronger shrinkage).
  int best = 0;
  for (int j = 1; j < J; ++j)
    if (report.total_loss[j] <= report.total_loss[best]) best = j;
  report.selected_index = best;
  report.selected_lambda = lambdas[best];

  AdmmConfig refit_cfg = cfg;
  refit_cfg.lambda = report.selected_lambda;
  const BlockTarget full = compress(AveragedAdjacency::average(sample), Z);
  report.refit = admm_solve(full, sample.rho(), refit_cfg, nullptr);
  return report;
}

}  // namespace netblock
