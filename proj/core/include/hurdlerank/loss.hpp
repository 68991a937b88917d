#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace hurdlerank {

enum class LossKind { quadratic, logistic, poisson, truncated_poisson };

enum class ValueDomain { reals, binary_pm1, nonnegative_integers, positive_integers };

/// One scalar loss family. The value domain follows from the kind.
struct LossSpec {
  LossKind kind = LossKind::quadratic;

  ValueDomain domain() const;

  friend bool operator==(const LossSpec&, const LossSpec&) = default;
};

std::string_view to_string(LossKind kind);
std::optional<LossKind> parse_loss_kind(std::string_view name);

struct LossDerivative {
  double gradient = 0.0;
  double curvature = 0.0;
};

/// Largest argument passed to exp() inside loss formulas.
inline constexpr double kMaxExponent = 700.0;

/// Number of times an exponent was clamped to kMaxExponent since start-up.
/// Non-zero values indicate a badly conditioned fit.
std::uint64_t conditioning_warnings();

/// Throws DomainError if `a` is not in the loss domain.
void check_domain(const LossSpec& spec, double a);

/// L(z, a). Throws DomainError on a domain violation or non-finite z.
double loss_eval(const LossSpec& spec, double z, double a);

/// dL/dz and d2L/dz2.
LossDerivative loss_deriv(const LossSpec& spec, double z, double a);

/// argmin over mu of sum_i L(mu, a_i).
double loss_offset(const LossSpec& spec, std::span<const double> values);

/// sigma^2 = sum_i L(offset, a_i) / (n - 1).
double loss_scale(const LossSpec& spec, double offset, std::span<const double> values);

/// The domain element minimizing L(z, .), skipping `exclude` when given.
double loss_argmin(const LossSpec& spec, double z, std::optional<double> exclude = std::nullopt);

/// Normalizer of the zero-truncated Poisson loss: the positive c with
/// a / c = exp(c) / (exp(c) - 1). For a = 1 the root sits at the lower end
/// of the search bracket (the supremum is approached as c -> 0).
double loss_tp_normalizer(double a);

/// a*log(c) - log(exp(c) - 1) at c = loss_tp_normalizer(a), i.e. the
/// maximum of the truncated log-likelihood kernel. Exactly 0 for a = 1.
double loss_tp_log_normalizer(double a);

/// Numerically stable log(1 + exp(x)).
double log1p_exp(double x);

/// Numerically stable 1 / (1 + exp(-x)).
double sigmoid(double x);

}  // namespace hurdlerank
