#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hurdlerank/hurdle.hpp"
#include "hurdlerank/loss.hpp"

namespace hurdlerank {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

using ColumnModel = std::variant<LossSpec, HurdleSpec>;

/// Per-column loss model together with its offset and scale.
///
/// Plain columns divide their loss by `scale` (sigma^2). Hurdle columns keep
/// `scale` at 1 and carry their weighting in HurdleSpec::lambda1/lambda2.
/// An uncalibrated column has zero offsets and unit scale.
struct ColumnSpec {
  std::string name;
  ColumnModel model = LossSpec{};
  std::vector<double> offset;
  double scale = 1.0;
  std::optional<double> c_multiplier;

  std::size_t embed_dim() const;
  bool is_hurdle() const { return std::holds_alternative<HurdleSpec>(model); }
  const HurdleSpec* hurdle() const { return std::get_if<HurdleSpec>(&model); }
  HurdleSpec* hurdle() { return std::get_if<HurdleSpec>(&model); }
  const LossSpec* plain() const { return std::get_if<LossSpec>(&model); }

  /// Whether an entry holding `a` contributes a loss term. Missing values
  /// only contribute to hurdle columns whose nu is the missing event.
  bool contributes(double a) const;

  /// Scaled loss of the embedding `z` (length embed_dim) against `a`; zero
  /// when the entry does not contribute.
  double entry_loss(std::span<const double> z, double a) const;

  /// Scaled gradient/curvature per embedding coordinate.
  HurdleDerivative entry_deriv(std::span<const double> z, double a) const;
};

/// Contiguous block of embedded columns belonging to one table column.
struct EmbeddedSpan {
  std::string name;
  std::size_t column = 0;
  std::size_t start = 0;
  std::size_t dim = 1;
};

/// n x p table of values (NaN marks a missing entry) with one ColumnSpec per
/// column.
struct DataTable {
  std::vector<ColumnSpec> columns;
  Matrix values;

  std::size_t n_rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t n_cols() const { return columns.size(); }

  std::size_t observed_count(std::size_t j) const;
  /// n_j: entries entering the column's loss (all rows for a missing-nu
  /// hurdle column).
  std::size_t loss_count(std::size_t j) const;
  /// sum_j (n_j - 1), the offset-only loss of a calibrated table.
  double total_loss() const;

  std::size_t embedded_dim() const;
  std::vector<EmbeddedSpan> layout() const;
  std::optional<std::size_t> find_column(const std::string& name) const;

  /// Shape and domain checks; throws DomainError.
  void validate() const;
};

/// Embedded-column labels: the column name for one-dimensional embeddings,
/// name:1 / name:2 for full hurdle columns.
std::vector<std::string> embedded_labels(const std::vector<EmbeddedSpan>& layout);

}  // namespace hurdlerank
