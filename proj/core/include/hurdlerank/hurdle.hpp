#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>

#include "hurdlerank/loss.hpp"

namespace hurdlerank {

/// Missing-entry marker used throughout value tables.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// The frequently occurring "interesting" value: a literal domain value or
/// the missingness event itself.
class Nu {
 public:
  static Nu missing() { return Nu(true, 0.0); }
  static Nu value(double v) { return Nu(false, v); }

  bool is_missing() const { return missing_; }
  /// Literal value; meaningless when is_missing().
  double literal() const { return value_; }

  /// True when `a` is the interesting value (NaN counts as missing).
  bool matches(double a) const;

  /// Value written to a reconstructed table when nu is predicted.
  double as_value() const { return missing_ ? kMissing : value_; }

  friend bool operator==(const Nu&, const Nu&) = default;

 private:
  Nu(bool missing, double v) : missing_(missing), value_(v) {}
  bool missing_;
  double value_;
};

enum class HurdleMode { full, reduced };

struct HurdleSpec {
  Nu nu = Nu::value(0.0);
  LossSpec binary_loss{LossKind::logistic};
  LossSpec g_loss{LossKind::poisson};
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  HurdleMode mode = HurdleMode::full;

  std::size_t embed_dim() const { return mode == HurdleMode::full ? 2 : 1; }

  /// Throws DomainError unless lambda1, lambda2 > 0 and binary_loss has a
  /// +-1 domain.
  void validate() const;
};

/// a* = +1 when `a` is nu, -1 otherwise.
double encode_indicator(double a, const Nu& nu);

struct HurdleWeights {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double mu_b = 0.0;
  double mu_g = 0.0;
  double binary_sum = 0.0;  // S_b: offset-only binary loss
  double g_sum = 0.0;       // S_g: offset-only g loss over non-nu entries
  std::size_t n = 0;        // entries entering the binary component
  std::size_t n_nu = 0;
};

/// Default contribution multiplier c = n_nu / (n - n_nu).
double default_multiplier(std::size_t n, std::size_t n_nu);

/// Solves
///   lambda1 * S_b + lambda2 * S_g = n - 1
///   lambda1 * S_b - c * lambda2 * S_g = 0
/// Returns {lambda1, lambda2}.
std::array<double, 2> solve_weight_system(double binary_sum, double g_sum, std::size_t n,
                                          double c);

/// Offsets and weights for one hurdle column. `values` holds every row of the
/// column; when nu is missing, NaN entries are nu events, otherwise NaN
/// entries are unobserved and skipped. `c` defaults to default_multiplier.
HurdleWeights solve_hurdle_weights(std::span<const double> values, const Nu& nu,
                                   std::optional<double> c, const LossSpec& binary_loss,
                                   const LossSpec& g_loss);

/// lambda1 * L_b(z1, a*) + I(a != nu) * lambda2 * L_g(z2, a), z2 = z1 when
/// reduced.
double hurdle_eval(const HurdleSpec& spec, std::span<const double> z, double a);

struct HurdleDerivative {
  std::array<double, 2> gradient{};
  std::array<double, 2> curvature{};
  std::size_t dim = 0;
};

HurdleDerivative hurdle_deriv(const HurdleSpec& spec, std::span<const double> z, double a);

/// Estimated Pr[a = nu] from the binary score (offset included).
double nu_probability(double z1);

/// argmin of the g loss over the domain without nu.
double hurdle_imputed_value(const HurdleSpec& spec, std::span<const double> z);

/// Reconstructed value: nu when the binary evidence outweighs the best non-nu
/// value, otherwise hurdle_imputed_value. Ties keep the non-nu value.
double hurdle_reconstruct(const HurdleSpec& spec, std::span<const double> z);

}  // namespace hurdlerank
