#include "hurdlerank/table.hpp"

#include <cmath>

#include "hurdlerank/errors.hpp"

namespace hurdlerank {

std::size_t ColumnSpec::embed_dim() const {
  if (const auto* h = hurdle()) return h->embed_dim();
  return 1;
}

bool ColumnSpec::contributes(double a) const {
  if (!std::isnan(a)) return true;
  const auto* h = hurdle();
  return h != nullptr && h->nu.is_missing();
}

double ColumnSpec::entry_loss(std::span<const double> z, double a) const {
  if (!contributes(a)) return 0.0;
  if (const auto* h = hurdle()) return hurdle_eval(*h, z, a);
  return loss_eval(*plain(), z[0], a) / scale;
}

HurdleDerivative ColumnSpec::entry_deriv(std::span<const double> z, double a) const {
  if (!contributes(a)) return HurdleDerivative{.dim = embed_dim()};
  if (const auto* h = hurdle()) return hurdle_deriv(*h, z, a);
  const auto d = loss_deriv(*plain(), z[0], a);
  HurdleDerivative out;
  out.dim = 1;
  out.gradient[0] = d.gradient / scale;
  out.curvature[0] = d.curvature / scale;
  return out;
}

std::size_t DataTable::observed_count(std::size_t j) const {
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    if (!std::isnan(values(i, static_cast<Eigen::Index>(j)))) ++count;
  }
  return count;
}

std::size_t DataTable::loss_count(std::size_t j) const {
  const auto* h = columns[j].hurdle();
  if (h != nullptr && h->nu.is_missing()) return n_rows();
  return observed_count(j);
}

double DataTable::total_loss() const {
  double total = 0.0;
  for (std::size_t j = 0; j < n_cols(); ++j) total += static_cast<double>(loss_count(j)) - 1.0;
  return total;
}

std::size_t DataTable::embedded_dim() const {
  std::size_t d = 0;
  for (const auto& c : columns) d += c.embed_dim();
  return d;
}

std::vector<EmbeddedSpan> DataTable::layout() const {
  std::vector<EmbeddedSpan> out;
  std::size_t start = 0;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.push_back({columns[j].name, j, start, columns[j].embed_dim()});
    start += columns[j].embed_dim();
  }
  return out;
}

std::optional<std::size_t> DataTable::find_column(const std::string& name) const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].name == name) return j;
  }
  return std::nullopt;
}

void DataTable::validate() const {
  if (static_cast<std::size_t>(values.cols()) != columns.size()) {
    throw DomainError("table has " + std::to_string(values.cols()) + " value columns but " +
                      std::to_string(columns.size()) + " column specs");
  }
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto& col = columns[j];
    if (!col.offset.empty() && col.offset.size() != col.embed_dim()) {
      throw DomainError("column " + col.name + " has an offset of the wrong length");
    }
    if (!(col.scale > 0.0)) throw DomainError("column " + col.name + " has a non-positive scale");
    const auto* h = col.hurdle();
    if (h != nullptr) h->validate();
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      const double a = values(i, static_cast<Eigen::Index>(j));
      if (std::isnan(a)) continue;
      try {
        if (h != nullptr) {
          if (!h->nu.matches(a)) check_domain(h->g_loss, a);
        } else {
          check_domain(*col.plain(), a);
        }
      } catch (const DomainError& e) {
        throw DomainError("column " + col.name + ", row " + std::to_string(i) + ": " + e.what());
      }
    }
  }
}

std::vector<std::string> embedded_labels(const std::vector<EmbeddedSpan>& layout) {
  std::vector<std::string> labels;
  for (const auto& span : layout) {
    if (span.dim == 1) {
      labels.push_back(span.name);
    } else {
      for (std::size_t s = 0; s < span.dim; ++s) {
        labels.push_back(span.name + ":" + std::to_string(s + 1));
      }
    }
  }
  return labels;
}

}  // namespace hurdlerank
