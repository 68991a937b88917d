#pragma once

#include <span>
#include <string>

#include "hurdlerank/solver.hpp"

namespace hurdlerank {

struct BaselineResult {
  std::string method;
  Matrix imputed;        // observed entries kept, missing entries filled
  Matrix reconstruction; // model value for every entry
  Vector offsets;        // per-column location estimate
  Matrix loadings;       // p x k for NIPALS, empty otherwise
  double imputation_mse = 0.0;
  double offset_mse = 0.0;
  std::size_t missing_count = 0;
  bool converged = true;
};

/// Scores `result` against the complete table: imputation MSE over the
/// entries missing in `observed`, offset MSE over the columns that have
/// missing entries. Both are NaN when nothing is missing.
void score_imputation(BaselineResult& result, const Matrix& observed, const Matrix& complete,
                      std::span<const double> true_offsets);

/// Replaces each missing entry by its column's observed mean.
BaselineResult mean_impute(const Matrix& values);

/// NIPALS PCA with missing entries skipped in the inner regressions.
/// Offsets are the means of the completed columns.
BaselineResult nipals_fit(const Matrix& values, std::size_t k, std::size_t max_iter = 1000,
                          double tol = 1e-12);

/// All-quadratic calibrated table over `values`, columns named c1..cp.
DataTable quadratic_table(const Matrix& values);

/// Quadratic GLRM fitted with `config`; offsets are the fitted mu.
BaselineResult quadratic_glrm(const Matrix& values, const FitConfig& config,
                              std::string method = "QuadraticGLRM");

/// Unregularized quadratic GLRM (PCA on the centered and scaled table). For
/// k >= p the observed entries are reproduced exactly.
BaselineResult pca_glrm(const Matrix& values, std::size_t k, std::uint64_t seed = 0);

}  // namespace hurdlerank
