#pragma once

#include <cmath>
#include <optional>
#include <utility>

namespace hurdlerank::detail {

// Root of an increasing function on [lo, hi]. `fn(x)` returns the pair
// (value, derivative). Newton steps that leave the current bracket, or that
// have a non-positive slope, fall back to bisection. When the function does
// not change sign on the bracket the nearer endpoint is returned.
template <class Fn>
std::optional<double> solve_increasing(Fn&& fn, double lo, double hi, double start, double tol,
                                       int max_iterations) {
  auto [f_lo, d_lo] = fn(lo);
  if (f_lo >= 0.0) return lo;
  auto [f_hi, d_hi] = fn(hi);
  if (f_hi <= 0.0) return hi;
  double x = (start > lo && start < hi) ? start : 0.5 * (lo + hi);
  for (int it = 0; it < max_iterations; ++it) {
    const auto [fx, dfx] = fn(x);
    if (fx == 0.0) return x;
    if (fx > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    double next = dfx > 0.0 ? x - fx / dfx : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < tol || hi - lo < tol) return next;
    x = next;
  }
  return std::nullopt;
}

}  // namespace hurdlerank::detail
