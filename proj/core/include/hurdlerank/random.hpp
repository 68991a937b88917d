#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hurdlerank {

/// Portable seeded generator.
///
/// std::mt19937_64 has a fully specified output sequence, but the standard
/// distributions do not. Uniform, normal and Poisson variates are therefore
/// derived here from raw engine output so that a seed yields the same stream
/// on every platform.
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64+boxmuller/1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via the Box-Muller transform; the second variate of
  /// each pair is cached.
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Poisson variate; chunked inversion keeps every step free of underflow.
  std::int64_t poisson(double rate);

  /// Poisson variate conditioned on being at least one.
  std::int64_t truncated_poisson(double rate);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace hurdlerank
