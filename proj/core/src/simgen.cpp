#include "hurdlerank/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hurdlerank/errors.hpp"
#include "hurdlerank/loss.hpp"
#include "hurdlerank/random.hpp"

namespace hurdlerank {

namespace {

// Scale of the gate and count loadings in the zero-inflated generator.
constexpr double kGateStrength = 2.0;
constexpr double kCountStrength = 0.8;
constexpr double kColumnEffectSd = 0.5;

Matrix standard_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols, double sd) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, sd);
  }
  return m;
}

}  // namespace

double mcar_missing_probability() { return 1.0 / (1.0 + std::exp(kMcarLogit)); }

std::size_t MarDatasetBundle::mcar_count() const {
  return static_cast<std::size_t>(std::count(mcar_mask.begin(), mcar_mask.end(), true));
}

std::size_t MarDatasetBundle::mar_count() const {
  return static_cast<std::size_t>(std::count(mar_mask.begin(), mar_mask.end(), true));
}

Matrix MarDatasetBundle::masked(const std::vector<bool>& mask) const {
  Matrix out = complete;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out(static_cast<Eigen::Index>(i), 0) = kMissing;
  }
  return out;
}

MarDatasetBundle simulate_mar_dataset(std::uint64_t seed, std::size_t n, std::size_t p,
                                      std::size_t k_true) {
  if (n < 2 || p < 3 || k_true < 1) {
    throw DomainError("MAR generator needs n >= 2, p >= 3 and k >= 1");
  }
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(p);
  const auto rank = static_cast<Eigen::Index>(k_true);

  Rng rng(seed);
  MarDatasetBundle b;
  b.seed = seed;
  b.truth_sigma.resize(cols);
  for (Eigen::Index j = 0; j < cols; ++j) b.truth_sigma(j) = rng.uniform(0.9, 1.1);
  b.truth_W = standard_normal(rng, cols, rank, 1.0);
  b.truth_mu = Vector::LinSpaced(cols, 1.0, static_cast<double>(p));

  b.complete.resize(rows, cols);
  Vector z(rank);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < rank; ++c) z(c) = rng.normal();
    const Vector signal = b.truth_W * z + b.truth_mu;
    for (Eigen::Index j = 0; j < cols; ++j) {
      b.complete(i, j) = signal(j) + rng.normal(0.0, std::sqrt(b.truth_sigma(j)));
    }
  }

  const double p_mcar = mcar_missing_probability();
  b.mcar_mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) b.mcar_mask[i] = rng.bernoulli(p_mcar);

  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    s[i] = b.complete(r, 1) + b.complete(r, 2);
  }
  const std::size_t mcar = b.mcar_count();
  const double target = mcar > 0 && mcar < n ? static_cast<double>(mcar) / static_cast<double>(n)
                                             : p_mcar;
  b.alpha = calibrate_alpha(s, target);
  b.mar_mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    b.mar_mask[i] = rng.bernoulli(1.0 / (1.0 + std::exp(b.alpha + s[i])));
  }
  return b;
}

double selection_rate(std::span<const double> s, double alpha) {
  double total = 0.0;
  for (double v : s) total += sigmoid(-(alpha + v));
  return total / static_cast<double>(s.size());
}

double calibrate_alpha(std::span<const double> s, double target_rate) {
  if (!(target_rate > 0.0 && target_rate < 1.0)) {
    throw DomainError("target selection rate must lie in (0, 1)");
  }
  if (s.empty()) throw DomainError("alpha calibration needs at least one score");
  // selection_rate is decreasing in alpha.
  double lo = -1.0;
  double hi = 1.0;
  while (selection_rate(s, lo) < target_rate) {
    lo *= 2.0;
    if (lo < -1e6) throw NumericFailure("could not bracket alpha from below");
  }
  while (selection_rate(s, hi) > target_rate) {
    hi *= 2.0;
    if (hi > 1e6) throw NumericFailure("could not bracket alpha from above");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double rate = selection_rate(s, mid);
    if (std::abs(rate - target_rate) < 1e-12 || hi - lo < 1e-14) return mid;
    if (rate > target_rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Matrix simulate_zero_inflated(std::uint64_t seed, std::size_t n, std::size_t p,
                              std::size_t k_true, std::span<const double> zero_rates,
                              double mean_scale) {
  if (zero_rates.size() != p) throw DomainError("one zero rate per column expected");
  for (double r : zero_rates) {
    if (!(r >= 0.0 && r < 1.0)) throw DomainError("zero rates must lie in [0, 1)");
  }
  if (!(mean_scale > 0.0)) throw DomainError("mean scale must be positive");
  if (n < 1 || p < 1 || k_true < 1) throw DomainError("generator dimensions must be positive");

  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(p);
  const auto rank = static_cast<Eigen::Index>(k_true);
  const double loading_sd = 1.0 / std::sqrt(static_cast<double>(k_true));

  Rng rng(seed);
  const Matrix U = standard_normal(rng, rows, rank, 1.0);
  const Matrix gate_loadings = standard_normal(rng, cols, rank, kGateStrength * loading_sd);
  const Matrix count_loadings = standard_normal(rng, cols, rank, kCountStrength * loading_sd);
  Vector column_effect(cols);
  for (Eigen::Index j = 0; j < cols; ++j) column_effect(j) = rng.normal(0.0, kColumnEffectSd);

  const Matrix gate_scores = U * gate_loadings.transpose();
  const Matrix log_rates =
      (U * count_loadings.transpose()).rowwise() + column_effect.transpose();

  Vector alpha = Vector::Zero(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (zero_rates[static_cast<std::size_t>(j)] > 0.0) {
      const Vector col = gate_scores.col(j);
      alpha(j) = calibrate_alpha(std::span<const double>(col.data(), n),
                                 zero_rates[static_cast<std::size_t>(j)]);
    }
  }

  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double rate = zero_rates[static_cast<std::size_t>(j)];
      if (rate > 0.0 && rng.bernoulli(sigmoid(-(alpha(j) + gate_scores(i, j))))) {
        out(i, j) = 0.0;
      } else {
        out(i, j) = static_cast<double>(
            rng.truncated_poisson(mean_scale * std::exp(log_rates(i, j))));
      }
    }
  }
  return out;
}

std::vector<double> default_zero_rates(std::size_t p) {
  std::vector<double> rates(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double t = p > 1 ? static_cast<double>(j) / static_cast<double>(p - 1) : 0.5;
    rates[j] = 0.05 + (0.99 - 0.05) * std::pow(t, 0.7);
  }
  return rates;
}

}  // namespace hurdlerank
