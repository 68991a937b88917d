#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hurdlerank/table.hpp"

namespace hurdlerank {

/// Selection logit of the MCAR scheme: Pr[missing] = 1 / (1 + exp(1.7)).
inline constexpr double kMcarLogit = 1.7;

double mcar_missing_probability();

/// Low-rank Gaussian data with MCAR and MAR masks on its first column.
struct MarDatasetBundle {
  Matrix complete;       // n x p
  Matrix truth_W;        // p x k
  Vector truth_mu;       // 1..p
  Vector truth_sigma;    // diagonal noise variances
  std::vector<bool> mcar_mask;
  std::vector<bool> mar_mask;
  double alpha = 0.0;
  std::uint64_t seed = 0;

  std::size_t mcar_count() const;
  std::size_t mar_count() const;
  /// Copy of `complete` with the masked first-column entries set missing.
  Matrix masked(const std::vector<bool>& mask) const;
};

/// a_i = W z_i + mu + e_i with z_i ~ N(0, I_k), e_i ~ N(0, Sigma), Sigma
/// diagonal uniform on (0.9, 1.1), W standard normal and mu = (1, ..., p).
/// The MAR intercept alpha is calibrated to the realized MCAR rate.
MarDatasetBundle simulate_mar_dataset(std::uint64_t seed, std::size_t n = 5000,
                                      std::size_t p = 10, std::size_t k_true = 4);

/// Mean of 1 / (1 + exp(alpha + s_i)).
double selection_rate(std::span<const double> s, double alpha);

/// alpha with selection_rate(s, alpha) = target_rate, by bisection.
double calibrate_alpha(std::span<const double> s, double target_rate);

/// Zero-inflated count table: a logistic gate on shared low-rank factors
/// (calibrated per column to `zero_rates`) followed by 1-truncated Poisson
/// counts whose log-mean is driven by the same factors. A zero rate of 0
/// disables the gate for that column.
Matrix simulate_zero_inflated(std::uint64_t seed, std::size_t n, std::size_t p,
                              std::size_t k_true, std::span<const double> zero_rates,
                              double mean_scale);

/// Zero rates rising from 0.05 to 0.99 across the columns, averaging about
/// 0.6.
std::vector<double> default_zero_rates(std::size_t p);

}  // namespace hurdlerank
