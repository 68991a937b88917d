#include "hurdlerank/random.hpp"

#include <cmath>
#include <numbers>

namespace hurdlerank {

namespace {

// Inversion stays well clear of exp() underflow for rates up to this size.
constexpr double kPoissonChunk = 20.0;

std::int64_t poisson_by_inversion(Rng& rng, double rate) {
  const double u = rng.uniform();
  double p = std::exp(-rate);
  double cdf = p;
  std::int64_t k = 0;
  while (u > cdf && k < 1000) {
    ++k;
    p *= rate / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

}  // namespace

double Rng::uniform(double lo, double hi) {
  double u = uniform();
  while (u == 0.0) u = uniform();
  return lo + (hi - lo) * u;
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

std::int64_t Rng::poisson(double rate) {
  if (!(rate > 0.0)) return 0;
  std::int64_t total = 0;
  double remaining = rate;
  while (remaining > kPoissonChunk) {
    total += poisson_by_inversion(*this, kPoissonChunk);
    remaining -= kPoissonChunk;
  }
  return total + poisson_by_inversion(*this, remaining);
}

std::int64_t Rng::truncated_poisson(double rate) {
  if (!(rate > 0.0)) return 1;
  if (rate > kPoissonChunk) {
    std::int64_t k = 0;
    while (k == 0) k = poisson(rate);
    return k;
  }
  // Inversion of the conditional law P(k | k >= 1).
  const double mass = -std::expm1(-rate);
  const double u = uniform() * mass;
  double p = std::exp(-rate) * rate;
  double cdf = p;
  std::int64_t k = 1;
  while (u > cdf && k < 1000) {
    ++k;
    p *= rate / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

}  // namespace hurdlerank
