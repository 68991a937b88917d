#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hurdlerank/solver.hpp"

namespace hurdlerank {

/// 1 - data_loss / sum_j (n_j - 1).
double loss_explained(const DataTable& table, const Factorization& fact);

/// Sample standard deviation (n - 1 denominator) of the observed entries of
/// each column.
Vector column_sd(const Matrix& values);

/// sum over observed (i, j) of ((reconstructed - original) / sd_j)^2.
double weighted_sse(const Matrix& original, const Matrix& reconstructed,
                    std::span<const double> column_sd);

enum class NuRule {
  /// A reconstructed entry predicts nu when it equals nu.
  exact,
  /// Numeric reconstructions predict nu when below nu + 0.5 (for counts
  /// with nu = 0: "a reconstructed value less than 0.5 means zero").
  numeric_threshold,
};

/// Fraction of observed entries whose nu indicator disagrees.
double misclassification_rate(const Matrix& original, const Matrix& reconstructed, double nu,
                              NuRule rule = NuRule::exact);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0, 0) to (1, 1)
  double auc = 0.0;
};

/// Threshold sweep over the distinct scores (labels: 1 positive, 0 negative).
/// Tied scores form a single step, so the trapezoid AUC equals the
/// Mann-Whitney statistic with ties counted one half.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

/// nu_probability of the binary component of hurdle column `column` for
/// every row.
std::vector<double> nu_scores(const DataTable& table, const Factorization& fact,
                              std::size_t column);

struct AssociationRow {
  std::string column;
  double theta = 0.0;
  double distance = 0.0;
  /// False when either vector has zero norm; theta and distance are NaN.
  bool defined = true;
};

/// Angle-based association between embedded column `binary_label` of Y and
/// every other embedded column, sorted by ascending distance (undefined rows
/// last). Labels follow embedded_labels().
std::vector<AssociationRow> column_association(const Factorization& fact,
                                               std::string_view binary_label);

/// theta = 1 - arccos(cos) / pi and distance = 1 - 2 |theta - 0.5| for two
/// vectors.
AssociationRow angle_association(const Vector& reference, const Vector& other);

}  // namespace hurdlerank
