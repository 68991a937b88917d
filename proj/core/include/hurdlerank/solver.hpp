#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hurdlerank/table.hpp"

namespace hurdlerank {

/// Fitted low-rank model Z = X Y + mu.
struct Factorization {
  Matrix X;  // n x k
  Matrix Y;  // k x d
  Vector mu; // d
  std::vector<EmbeddedSpan> column_layout;

  std::size_t rank() const { return static_cast<std::size_t>(X.cols()); }
  /// Embedding of entry (i, j): x_i Y^(j) + mu_j.
  void embedding(std::size_t i, const EmbeddedSpan& span, std::span<double> out) const;
  /// Throws DomainError on inconsistent shapes or non-finite entries.
  void validate(std::size_t n_rows) const;
};

struct FitConfig {
  std::size_t rank = 2;
  double gamma_x = 0.0;
  double gamma_y = 0.0;
  std::size_t max_sweeps = 500;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
  int step_halvings = 20;
  std::size_t restarts = 1;
  std::size_t threads = 1;
  std::vector<std::string> mar_offset_columns;

  void set_gamma(double gamma) { gamma_x = gamma_y = gamma; }
};

struct FitResult {
  Factorization fact;
  /// trace[0] is the objective at initialization, trace[s] after sweep s.
  std::vector<double> trace;
  std::size_t sweeps = 0;
  bool converged = false;
};

/// Fills every column's offset and scale (plain columns) or offsets and
/// lambda weights (hurdle columns). `c_multipliers`, when non-empty, overrides
/// each hurdle column's c; nullopt entries fall back to the column setting or
/// the default n_nu / (n - n_nu).
DataTable calibrate(DataTable table, const std::vector<std::optional<double>>& c_multipliers = {});

/// Unregularized data loss of `fact` on `table`.
double data_loss(const DataTable& table, const Factorization& fact);

/// Data loss plus gamma_x ||X||^2 + gamma_y ||Y||^2.
double objective(const DataTable& table, const FitConfig& config, const Factorization& fact);

/// Factorization with X = 0, Y = 0 and mu taken from the table's offsets.
Factorization offset_only(const DataTable& table, std::size_t rank);

/// Random initialization: X and Y entries i.i.d. N(0, 1/k) from `seed`.
Factorization initialize(const DataTable& table, std::size_t rank, std::uint64_t seed);

/// Alternating damped Newton fit.
FitResult fit(const DataTable& table, const FitConfig& config);

/// Continues fitting from `start`.
FitResult fit_from(const DataTable& table, const FitConfig& config, Factorization start);

/// Replaces the value-component offset of `column` by the mean residual over
/// its observed entries, and returns the new offset.
double mar_offset_refresh(const DataTable& table, Factorization& fact, std::size_t column);

enum class ReconstructionMode {
  /// Hurdle columns may return nu.
  decision,
  /// Hurdle columns always return the best non-nu value.
  imputation,
};

/// n x p table of reconstructed values.
Matrix reconstruct_table(const DataTable& table, const Factorization& fact,
                         ReconstructionMode mode = ReconstructionMode::decision);

struct GammaSelection {
  double gamma = 0.0;
  std::vector<double> grid;
  std::vector<double> holdout_mse;
  std::size_t holdout_count = 0;
};

/// Grid search for gamma = gamma_x = gamma_y by held-out MCAR imputation
/// error. Ties go to the larger gamma.
GammaSelection select_gamma(const DataTable& table, const FitConfig& config,
                            std::span<const double> grid, double holdout_rate,
                            std::uint64_t seed);

}  // namespace hurdlerank
