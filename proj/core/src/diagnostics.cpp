#include "hurdlerank/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "hurdlerank/errors.hpp"

namespace hurdlerank {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DomainError("original and reconstructed tables differ in shape");
  }
}

bool predicts_nu(double value, double nu, NuRule rule) {
  if (rule == NuRule::numeric_threshold) return value < nu + 0.5;
  return value == nu;
}

}  // namespace

double loss_explained(const DataTable& table, const Factorization& fact) {
  return 1.0 - data_loss(table, fact) / table.total_loss();
}

Vector column_sd(const Matrix& values) {
  Vector sd(values.cols());
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    double sum = 0.0;
    double count = 0.0;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      if (std::isnan(values(i, j))) continue;
      sum += values(i, j);
      count += 1.0;
    }
    const double mean = sum / count;
    double ss = 0.0;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      if (std::isnan(values(i, j))) continue;
      ss += (values(i, j) - mean) * (values(i, j) - mean);
    }
    sd(j) = count > 1.0 ? std::sqrt(ss / (count - 1.0)) : 0.0;
  }
  return sd;
}

double weighted_sse(const Matrix& original, const Matrix& reconstructed,
                    std::span<const double> sd) {
  check_same_shape(original, reconstructed);
  if (static_cast<Eigen::Index>(sd.size()) != original.cols()) {
    throw DomainError("one standard deviation per column expected");
  }
  double total = 0.0;
  for (Eigen::Index j = 0; j < original.cols(); ++j) {
    const double s = sd[static_cast<std::size_t>(j)];
    if (!(s > 0.0)) throw DomainError("column " + std::to_string(j) + " has zero standard deviation");
    for (Eigen::Index i = 0; i < original.rows(); ++i) {
      if (std::isnan(original(i, j))) continue;
      const double r = (reconstructed(i, j) - original(i, j)) / s;
      total += r * r;
    }
  }
  return total;
}

double misclassification_rate(const Matrix& original, const Matrix& reconstructed, double nu,
                              NuRule rule) {
  check_same_shape(original, reconstructed);
  std::size_t observed = 0;
  std::size_t wrong = 0;
  for (Eigen::Index j = 0; j < original.cols(); ++j) {
    for (Eigen::Index i = 0; i < original.rows(); ++i) {
      const double a = original(i, j);
      if (std::isnan(a)) continue;
      ++observed;
      if ((a == nu) != predicts_nu(reconstructed(i, j), nu, rule)) ++wrong;
    }
  }
  if (observed == 0) return 0.0;
  return static_cast<double>(wrong) / static_cast<double>(observed);
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DomainError("scores and labels differ in length");
  std::size_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DomainError("labels must be 0 or 1");
    if (std::isnan(scores[i])) throw DomainError("scores must not be NaN");
    positives += static_cast<std::size_t>(labels[i]);
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw DomainError("ROC needs at least one positive and one negative label");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  double area = 0.0;
  for (std::size_t pos = 0; pos < order.size();) {
    const double threshold = scores[order[pos]];
    while (pos < order.size() && scores[order[pos]] == threshold) {
      if (labels[order[pos]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
      ++pos;
    }
    const RocPoint next{static_cast<double>(fp) / static_cast<double>(negatives),
                        static_cast<double>(tp) / static_cast<double>(positives)};
    const RocPoint& prev = curve.points.back();
    area += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) * 0.5;
    curve.points.push_back(next);
  }
  curve.auc = area;
  return curve;
}

std::vector<double> nu_scores(const DataTable& table, const Factorization& fact,
                              std::size_t column) {
  const auto* h = table.columns.at(column).hurdle();
  if (h == nullptr) throw DomainError("nu scores need a hurdle column");
  const auto& span = fact.column_layout.at(column);
  std::array<double, 2> z{};
  std::vector<double> out(table.n_rows());
  for (std::size_t i = 0; i < table.n_rows(); ++i) {
    fact.embedding(i, span, z);
    out[i] = nu_probability(z[0]);
  }
  return out;
}

AssociationRow angle_association(const Vector& reference, const Vector& other) {
  AssociationRow row;
  const double norms = reference.norm() * other.norm();
  if (!(norms > 0.0)) {
    row.defined = false;
    row.theta = std::numeric_limits<double>::quiet_NaN();
    row.distance = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  const double cosine = std::clamp(reference.dot(other) / norms, -1.0, 1.0);
  row.theta = 1.0 - std::acos(cosine) / std::numbers::pi;
  row.distance = 1.0 - 2.0 * std::abs(row.theta - 0.5);
  return row;
}

std::vector<AssociationRow> column_association(const Factorization& fact,
                                               std::string_view binary_label) {
  const auto labels = embedded_labels(fact.column_layout);
  const auto it = std::find(labels.begin(), labels.end(), binary_label);
  if (it == labels.end()) {
    throw DomainError("no embedded column named " + std::string(binary_label));
  }
  const auto ref_index = static_cast<Eigen::Index>(it - labels.begin());
  const Vector reference = fact.Y.col(ref_index);
  if (!(reference.norm() > 0.0)) {
    throw DomainError("embedded column " + std::string(binary_label) + " has zero norm");
  }
  std::vector<AssociationRow> rows;
  for (Eigen::Index e = 0; e < fact.Y.cols(); ++e) {
    if (e == ref_index) continue;
    auto row = angle_association(reference, fact.Y.col(e));
    row.column = labels[static_cast<std::size_t>(e)];
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const AssociationRow& a, const AssociationRow& b) {
    if (a.defined != b.defined) return a.defined;
    return a.distance < b.distance;
  });
  return rows;
}

}  // namespace hurdlerank
