#include "hurdlerank/loss.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "hurdlerank/errors.hpp"
#include "safeguarded_newton.hpp"

namespace hurdlerank {

namespace {

std::atomic<std::uint64_t> g_conditioning_warnings{0};

constexpr double kNormalizerLower = 1e-8;
constexpr double kNormalizerTol = 1e-10;
constexpr int kMaxNewtonIterations = 500;

double guarded_exp(double z) {
  if (z > kMaxExponent) {
    g_conditioning_warnings.fetch_add(1, std::memory_order_relaxed);
    z = kMaxExponent;
  }
  return std::exp(z);
}

double clamp_exponent(double z) {
  if (z > kMaxExponent) {
    g_conditioning_warnings.fetch_add(1, std::memory_order_relaxed);
    return kMaxExponent;
  }
  return z;
}

bool is_integer(double a) { return std::isfinite(a) && std::floor(a) == a; }

// h(m) = m / (1 - exp(-m)): mean of a zero-truncated Poisson with rate m.
double truncated_mean(double m) {
  if (m < 1e-5) return 1.0 + 0.5 * m;
  return m / -std::expm1(-m);
}

// dh/dm.
double truncated_mean_slope(double m) {
  if (m < 1e-5) return 0.5 + m / 6.0;
  const double one_minus = -std::expm1(-m);
  return (one_minus - m * std::exp(-m)) / (one_minus * one_minus);
}

// log(exp(m) - 1) for m > 0.
double log_expm1(double m) {
  if (m > 30.0) return m + std::log1p(-std::exp(-m));
  return std::log(std::expm1(m));
}

// log((exp(m) - 1) / m) for m >= 0, accurate as m -> 0.
double log_expm1_over_m(double m) {
  if (m < 1e-5) return std::log1p(0.5 * m + m * m / 6.0);
  if (m > 30.0) return m + std::log1p(-std::exp(-m)) - std::log(m);
  return std::log(std::expm1(m) / m);
}

struct Normalizer {
  double c = 0.0;
  double log_kernel = 0.0;  // a log c - log(exp(c) - 1)
};

Normalizer compute_normalizer(double a) {
  Normalizer out;
  if (a == 1.0) {
    // h(c) > 1 for every c > 0: the root is pinned to the lower bracket and
    // the kernel supremum is its c -> 0 limit.
    out.c = kNormalizerLower;
    out.log_kernel = 0.0;
    return out;
  }
  const auto residual = [a](double c) {
    return std::pair{truncated_mean(c) - a, truncated_mean_slope(c)};
  };
  const auto root = detail::solve_increasing(residual, kNormalizerLower, a + 10.0,
                                             std::min(a, a + 10.0), kNormalizerTol,
                                             kMaxNewtonIterations);
  if (!root) {
    throw NumericFailure("truncated Poisson normalizer did not converge for a = " +
                         std::to_string(a));
  }
  out.c = *root;
  out.log_kernel = a * std::log(out.c) - log_expm1(out.c);
  return out;
}

const Normalizer& cached_normalizer(double a) {
  constexpr std::size_t kCacheSize = 1 << 14;
  thread_local std::vector<Normalizer> cache(kCacheSize);
  thread_local std::vector<bool> filled(kCacheSize, false);
  thread_local Normalizer scratch;
  if (a < static_cast<double>(kCacheSize)) {
    const auto idx = static_cast<std::size_t>(a);
    if (!filled[idx]) {
      cache[idx] = compute_normalizer(a);
      filled[idx] = true;
    }
    return cache[idx];
  }
  scratch = compute_normalizer(a);
  return scratch;
}

double truncated_poisson_loss(double z, double a) {
  const double m = std::exp(z);
  if (a == 1.0) return log_expm1_over_m(m);
  const Normalizer& norm = cached_normalizer(a);
  const double r = z - std::log(norm.c);
  double kernel_gap;
  if (m > 30.0 && norm.c > 30.0) {
    kernel_gap = norm.c * std::expm1(r) + std::log1p(-std::exp(-m)) -
                 std::log1p(-std::exp(-norm.c));
  } else {
    // log(exp(x) - 1) = log x + log((exp(x) - 1) / x) stays finite as x -> 0.
    kernel_gap = r + log_expm1_over_m(m) - log_expm1_over_m(norm.c);
  }
  return kernel_gap - a * r;
}

void require_finite(double z) {
  if (!std::isfinite(z)) throw DomainError("loss argument z must be finite");
}

std::string describe(double a) {
  if (std::isnan(a)) return "missing";
  return std::to_string(a);
}

}  // namespace

ValueDomain LossSpec::domain() const {
  switch (kind) {
    case LossKind::quadratic:
      return ValueDomain::reals;
    case LossKind::logistic:
      return ValueDomain::binary_pm1;
    case LossKind::poisson:
      return ValueDomain::nonnegative_integers;
    case LossKind::truncated_poisson:
      return ValueDomain::positive_integers;
  }
  return ValueDomain::reals;
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::quadratic:
      return "quadratic";
    case LossKind::logistic:
      return "logistic";
    case LossKind::poisson:
      return "poisson";
    case LossKind::truncated_poisson:
      return "truncated_poisson";
  }
  return "unknown";
}

std::optional<LossKind> parse_loss_kind(std::string_view name) {
  for (auto kind : {LossKind::quadratic, LossKind::logistic, LossKind::poisson,
                    LossKind::truncated_poisson}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

std::uint64_t conditioning_warnings() {
  return g_conditioning_warnings.load(std::memory_order_relaxed);
}

double log1p_exp(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_domain(const LossSpec& spec, double a) {
  bool ok = false;
  switch (spec.domain()) {
    case ValueDomain::reals:
      ok = std::isfinite(a);
      break;
    case ValueDomain::binary_pm1:
      ok = a == 1.0 || a == -1.0;
      break;
    case ValueDomain::nonnegative_integers:
      ok = is_integer(a) && a >= 0.0;
      break;
    case ValueDomain::positive_integers:
      ok = is_integer(a) && a >= 1.0;
      break;
  }
  if (!ok) {
    throw DomainError("value " + describe(a) + " outside the domain of " +
                      std::string(to_string(spec.kind)) + " loss");
  }
}

double loss_eval(const LossSpec& spec, double z, double a) {
  require_finite(z);
  check_domain(spec, a);
  switch (spec.kind) {
    case LossKind::quadratic:
      return (z - a) * (z - a);
    case LossKind::logistic: {
      const double margin = a * z;
      return std::log1p(std::exp(-std::abs(margin))) + std::max(0.0, -margin);
    }
    case LossKind::poisson: {
      const double zc = clamp_exponent(z);
      if (a == 0.0) return std::exp(zc);
      // exp(z) - a z + a log a - a, rewritten around r = z - log a.
      const double r = zc - std::log(a);
      return a * (std::expm1(r) - r);
    }
    case LossKind::truncated_poisson:
      return truncated_poisson_loss(clamp_exponent(z), a);
  }
  return 0.0;
}

LossDerivative loss_deriv(const LossSpec& spec, double z, double a) {
  require_finite(z);
  check_domain(spec, a);
  switch (spec.kind) {
    case LossKind::quadratic:
      return {2.0 * (z - a), 2.0};
    case LossKind::logistic: {
      // -a * sigmoid(-a z)
      const double grad = a > 0.0 ? -sigmoid(-z) : sigmoid(z);
      return {grad, sigmoid(z) * sigmoid(-z)};
    }
    case LossKind::poisson: {
      const double m = guarded_exp(z);
      return {m - a, m};
    }
    case LossKind::truncated_poisson: {
      const double m = guarded_exp(z);
      return {truncated_mean(m) - a, m * truncated_mean_slope(m)};
    }
  }
  return {};
}

double loss_offset(const LossSpec& spec, std::span<const double> values) {
  if (values.empty()) throw DomainError("loss_offset needs at least one value");
  for (double a : values) check_domain(spec, a);
  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  switch (spec.kind) {
    case LossKind::quadratic:
      return mean;
    case LossKind::logistic: {
      const auto positives = std::count(values.begin(), values.end(), 1.0);
      const auto negatives = static_cast<std::ptrdiff_t>(values.size()) - positives;
      if (positives == 0 || negatives == 0) {
        throw DegenerateColumn("logistic offset diverges: all targets share one class");
      }
      return std::log(static_cast<double>(positives) / static_cast<double>(negatives));
    }
    case LossKind::poisson:
      if (mean == 0.0) throw DegenerateColumn("poisson offset diverges: all values are zero");
      return std::log(mean);
    case LossKind::truncated_poisson: {
      if (mean == 1.0) {
        throw DegenerateColumn("truncated poisson offset diverges: all values are one");
      }
      // Stationarity: h(exp(mu)) = mean. h(c) <= 1 + c and h(c) > c bracket
      // the root in [log(mean - 1), log(mean)].
      const auto residual = [mean](double mu) {
        const double m = std::exp(mu);
        return std::pair{truncated_mean(m) - mean, m * truncated_mean_slope(m)};
      };
      const auto root = detail::solve_increasing(residual, std::log(mean - 1.0), std::log(mean),
                                                 std::log(mean), 1e-12, kMaxNewtonIterations);
      if (!root) throw NumericFailure("truncated poisson offset did not converge");
      return *root;
    }
  }
  return mean;
}

double loss_scale(const LossSpec& spec, double offset, std::span<const double> values) {
  if (values.size() < 2) throw DomainError("loss_scale needs at least two values");
  double total = 0.0;
  for (double a : values) total += loss_eval(spec, offset, a);
  const double sigma2 = total / static_cast<double>(values.size() - 1);
  if (!(sigma2 > 0.0)) {
    throw DegenerateColumn("column has zero loss at its offset; cannot scale");
  }
  return sigma2;
}

double loss_argmin(const LossSpec& spec, double z, std::optional<double> exclude) {
  require_finite(z);
  switch (spec.kind) {
    case LossKind::quadratic:
      return z;
    case LossKind::logistic: {
      const double best = z > 0.0 ? 1.0 : -1.0;
      if (exclude && *exclude == best) return -best;
      return best;
    }
    case LossKind::poisson:
    case LossKind::truncated_poisson: {
      const double m = std::exp(clamp_exponent(z));
      // Both losses are convex in a; the continuous minimizer is exp(z) for
      // Poisson and h(exp(z)) for the truncated form.
      const double target = spec.kind == LossKind::poisson ? m : truncated_mean(m);
      const double lowest = spec.kind == LossKind::poisson ? 0.0 : 1.0;
      const double base = std::floor(target);
      double best = std::numeric_limits<double>::quiet_NaN();
      double best_loss = std::numeric_limits<double>::infinity();
      for (double cand : {base - 1.0, base, base + 1.0, base + 2.0}) {
        if (cand < lowest) continue;
        if (exclude && cand == *exclude) continue;
        const double l = loss_eval(spec, z, cand);
        if (l < best_loss) {
          best_loss = l;
          best = cand;
        }
      }
      if (std::isnan(best)) {
        // Only reachable when every nearby candidate was excluded.
        best = std::max(lowest, base + 3.0);
      }
      return best;
    }
  }
  return z;
}

double loss_tp_normalizer(double a) {
  check_domain(LossSpec{LossKind::truncated_poisson}, a);
  return cached_normalizer(a).c;
}

double loss_tp_log_normalizer(double a) {
  check_domain(LossSpec{LossKind::truncated_poisson}, a);
  return cached_normalizer(a).log_kernel;
}

}  // namespace hurdlerank
