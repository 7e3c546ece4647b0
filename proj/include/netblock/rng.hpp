#pragma once

#include <array>
#include <cstdint>

namespace netblock {

/// xoshiro256++ seeded through SplitMix64. Every draw goes through
/// next_u64(), so streams are reproducible across platforms, compilers and
/// thread counts (unlike the <random> distributions).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1), 53 mantissa bits.
  double uniform();
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n), n > 0.
  std::uint64_t uniform_below(std::uint64_t n);

  bool bernoulli(double p);

  /// Standard normal via the polar method (one value cached).
  double normal();

  /// Number of Bernoulli(p) failures before the next success, 0 < p < 1.
  /// Used for geometric edge skipping in the samplers.
  std::uint64_t skip_geometric(double p);

 private:
  std::array<std::uint64_t, 4> state_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

/// Deterministic seed for a derived stream (restart r, fold m, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace netblock
