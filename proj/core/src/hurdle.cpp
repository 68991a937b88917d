#include "hurdlerank/hurdle.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "hurdlerank/errors.hpp"

namespace hurdlerank {

namespace {

void check_length(const HurdleSpec& spec, std::span<const double> z) {
  if (z.size() != spec.embed_dim()) {
    throw DomainError("hurdle embedding has length " + std::to_string(z.size()) + ", expected " +
                      std::to_string(spec.embed_dim()));
  }
}

double g_argument(const HurdleSpec& spec, std::span<const double> z) {
  return spec.mode == HurdleMode::full ? z[1] : z[0];
}

void check_observed(const HurdleSpec& spec, double a) {
  if (std::isnan(a) && !spec.nu.is_missing()) {
    throw DomainError("hurdle loss evaluated at an unobserved entry");
  }
}

}  // namespace

bool Nu::matches(double a) const {
  if (missing_) return std::isnan(a);
  return a == value_;
}

void HurdleSpec::validate() const {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
    throw DomainError("hurdle weights must be positive");
  }
  if (binary_loss.domain() != ValueDomain::binary_pm1) {
    throw DomainError("hurdle binary component needs a +-1 loss");
  }
}

double encode_indicator(double a, const Nu& nu) { return nu.matches(a) ? 1.0 : -1.0; }

double default_multiplier(std::size_t n, std::size_t n_nu) {
  return static_cast<double>(n_nu) / static_cast<double>(n - n_nu);
}

std::array<double, 2> solve_weight_system(double binary_sum, double g_sum, std::size_t n,
                                          double c) {
  if (!(c > 0.0)) throw DomainError("hurdle multiplier c must be positive");
  if (!(binary_sum > 0.0) || !(g_sum > 0.0)) {
    throw DegenerateColumn("hurdle component has zero offset-only loss");
  }
  const double total = static_cast<double>(n) - 1.0;
  return {c * total / ((c + 1.0) * binary_sum), total / ((c + 1.0) * g_sum)};
}

HurdleWeights solve_hurdle_weights(std::span<const double> values, const Nu& nu,
                                   std::optional<double> c, const LossSpec& binary_loss,
                                   const LossSpec& g_loss) {
  if (binary_loss.domain() != ValueDomain::binary_pm1) {
    throw DomainError("hurdle binary component needs a +-1 loss");
  }
  std::vector<double> targets;
  std::vector<double> g_values;
  targets.reserve(values.size());
  for (double a : values) {
    if (std::isnan(a) && !nu.is_missing()) continue;
    const double indicator = encode_indicator(a, nu);
    targets.push_back(indicator);
    if (indicator < 0.0) g_values.push_back(a);
  }

  HurdleWeights w;
  w.n = targets.size();
  w.n_nu = w.n - g_values.size();
  if (w.n_nu < 2 || g_values.size() < 2) {
    throw DegenerateColumn("hurdle column needs at least two nu and two non-nu entries");
  }

  w.mu_b = loss_offset(binary_loss, targets);
  w.mu_g = loss_offset(g_loss, g_values);
  for (double t : targets) w.binary_sum += loss_eval(binary_loss, w.mu_b, t);
  for (double a : g_values) w.g_sum += loss_eval(g_loss, w.mu_g, a);

  const double multiplier = c.value_or(default_multiplier(w.n, w.n_nu));
  const auto [l1, l2] = solve_weight_system(w.binary_sum, w.g_sum, w.n, multiplier);
  w.lambda1 = l1;
  w.lambda2 = l2;

  const double total = static_cast<double>(w.n) - 1.0;
  const double achieved = l1 * w.binary_sum + l2 * w.g_sum;
  const double balance = l1 * w.binary_sum - multiplier * l2 * w.g_sum;
  if (std::abs(achieved - total) > 1e-9 * std::max(1.0, total) ||
      std::abs(balance) > 1e-9 * std::max(1.0, total)) {
    throw NumericFailure("hurdle weight system residual exceeds tolerance");
  }
  return w;
}

double hurdle_eval(const HurdleSpec& spec, std::span<const double> z, double a) {
  check_length(spec, z);
  check_observed(spec, a);
  double value = spec.lambda1 * loss_eval(spec.binary_loss, z[0], encode_indicator(a, spec.nu));
  if (!spec.nu.matches(a)) value += spec.lambda2 * loss_eval(spec.g_loss, g_argument(spec, z), a);
  return value;
}

HurdleDerivative hurdle_deriv(const HurdleSpec& spec, std::span<const double> z, double a) {
  check_length(spec, z);
  check_observed(spec, a);
  HurdleDerivative out;
  out.dim = spec.embed_dim();
  const auto b = loss_deriv(spec.binary_loss, z[0], encode_indicator(a, spec.nu));
  out.gradient[0] = spec.lambda1 * b.gradient;
  out.curvature[0] = spec.lambda1 * b.curvature;
  if (!spec.nu.matches(a)) {
    const auto g = loss_deriv(spec.g_loss, g_argument(spec, z), a);
    const std::size_t slot = spec.mode == HurdleMode::full ? 1 : 0;
    out.gradient[slot] += spec.lambda2 * g.gradient;
    out.curvature[slot] += spec.lambda2 * g.curvature;
  }
  return out;
}

double nu_probability(double z1) { return sigmoid(z1); }

double hurdle_imputed_value(const HurdleSpec& spec, std::span<const double> z) {
  check_length(spec, z);
  std::optional<double> exclude;
  if (!spec.nu.is_missing()) exclude = spec.nu.literal();
  return loss_argmin(spec.g_loss, g_argument(spec, z), exclude);
}

double hurdle_reconstruct(const HurdleSpec& spec, std::span<const double> z) {
  const double best = hurdle_imputed_value(spec, z);
  const double not_nu = spec.lambda1 * loss_eval(spec.binary_loss, z[0], -1.0) +
                        spec.lambda2 * loss_eval(spec.g_loss, g_argument(spec, z), best);
  const double is_nu = spec.lambda1 * loss_eval(spec.binary_loss, z[0], 1.0);
  // ratio not_nu / is_nu > 1; is_nu > 0 for the logistic loss.
  return not_nu > is_nu ? spec.nu.as_value() : best;
}

}  // namespace hurdlerank
