#include "hurdlerank/baselines.hpp"

#include <cmath>
#include <limits>

#include "hurdlerank/errors.hpp"

namespace hurdlerank {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vector observed_means(const Matrix& values) {
  Vector means(values.cols());
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    double sum = 0.0;
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      if (std::isnan(values(i, j))) continue;
      sum += values(i, j);
      ++count;
    }
    if (count == 0) throw DomainError("column " + std::to_string(j) + " has no observed values");
    means(j) = sum / static_cast<double>(count);
  }
  return means;
}

std::size_t count_missing(const Matrix& values) {
  return static_cast<std::size_t>(values.array().isNaN().count());
}

// Keeps observed entries of `values` and takes the rest from `model`.
Matrix fill_missing(const Matrix& values, const Matrix& model) {
  Matrix out = values;
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      if (std::isnan(values(i, j))) out(i, j) = model(i, j);
    }
  }
  return out;
}

}  // namespace

void score_imputation(BaselineResult& result, const Matrix& observed, const Matrix& complete,
                      std::span<const double> true_offsets) {
  if (complete.rows() != observed.rows() || complete.cols() != observed.cols() ||
      result.imputed.rows() != observed.rows() || result.imputed.cols() != observed.cols()) {
    throw DomainError("imputation scoring needs tables of equal shape");
  }
  if (static_cast<Eigen::Index>(true_offsets.size()) != observed.cols()) {
    throw DomainError("one true offset per column expected");
  }
  double sse = 0.0;
  std::size_t missing = 0;
  double offset_sse = 0.0;
  std::size_t offset_columns = 0;
  for (Eigen::Index j = 0; j < observed.cols(); ++j) {
    std::size_t column_missing = 0;
    for (Eigen::Index i = 0; i < observed.rows(); ++i) {
      if (!std::isnan(observed(i, j))) continue;
      const double r = result.imputed(i, j) - complete(i, j);
      sse += r * r;
      ++column_missing;
    }
    if (column_missing > 0) {
      const double r = result.offsets(j) - true_offsets[static_cast<std::size_t>(j)];
      offset_sse += r * r;
      ++offset_columns;
    }
    missing += column_missing;
  }
  result.missing_count = missing;
  result.imputation_mse = missing > 0 ? sse / static_cast<double>(missing) : kNaN;
  result.offset_mse = offset_columns > 0 ? offset_sse / static_cast<double>(offset_columns) : kNaN;
}

BaselineResult mean_impute(const Matrix& values) {
  BaselineResult r;
  r.method = "SampleMean";
  r.offsets = observed_means(values);
  const Matrix model = Matrix::Ones(values.rows(), 1) * r.offsets.transpose();
  r.imputed = fill_missing(values, model);
  r.reconstruction = model;
  r.missing_count = count_missing(values);
  r.imputation_mse = kNaN;
  r.offset_mse = kNaN;
  return r;
}

BaselineResult nipals_fit(const Matrix& values, std::size_t k, std::size_t max_iter, double tol) {
  const auto n = values.rows();
  const auto p = values.cols();
  if (k < 1 || static_cast<Eigen::Index>(k) > p) throw DomainError("NIPALS rank must be in [1, p]");

  const Vector center = observed_means(values);
  const Matrix observed = (!values.array().isNaN()).cast<double>().matrix();
  Matrix residual = values.rowwise() - center.transpose();
  residual = residual.array().isNaN().select(0.0, residual);

  BaselineResult r;
  r.method = "NIPALS";
  const auto rank = static_cast<Eigen::Index>(k);
  Matrix scores = Matrix::Zero(n, rank);
  r.loadings = Matrix::Zero(p, rank);

  for (Eigen::Index c = 0; c < rank; ++c) {
    // Start from the column with the largest observed spread.
    Eigen::Index start = 0;
    residual.colwise().squaredNorm().maxCoeff(&start);
    Vector t = residual.col(start);
    Vector loading(p);
    bool converged = false;
    for (std::size_t it = 0; it < max_iter; ++it) {
      const Vector t_sq = t.array().square();
      // Regressions over observed entries only (missing entries are zero in
      // `residual` and masked in the denominators).
      loading = residual.transpose() * t;
      const Vector col_den = observed.transpose() * t_sq;
      loading = loading.array() / col_den.array().max(1e-300);
      loading /= loading.norm();
      const Vector l_sq = loading.array().square();
      Vector t_next = residual * loading;
      const Vector row_den = observed * l_sq;
      t_next = t_next.array() / row_den.array().max(1e-300);
      const double change = (t_next - t).squaredNorm() / std::max(t_next.squaredNorm(), 1e-300);
      t = t_next;
      if (change < tol) {
        converged = true;
        break;
      }
    }
    r.converged = r.converged && converged;
    scores.col(c) = t;
    r.loadings.col(c) = loading;
    residual -= (t * loading.transpose()).cwiseProduct(observed);
  }

  const Matrix model = (scores * r.loadings.transpose()).rowwise() + center.transpose();
  r.imputed = fill_missing(values, model);
  r.reconstruction = model;
  r.offsets = r.imputed.colwise().mean().transpose();
  r.missing_count = count_missing(values);
  r.imputation_mse = kNaN;
  r.offset_mse = kNaN;
  return r;
}

DataTable quadratic_table(const Matrix& values) {
  DataTable table;
  table.values = values;
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    ColumnSpec col;
    col.name = "c" + std::to_string(j + 1);
    col.model = LossSpec{LossKind::quadratic};
    table.columns.push_back(std::move(col));
  }
  return calibrate(std::move(table));
}

BaselineResult quadratic_glrm(const Matrix& values, const FitConfig& config, std::string method) {
  const DataTable table = quadratic_table(values);
  const auto result = fit(table, config);
  BaselineResult r;
  r.method = std::move(method);
  r.reconstruction = reconstruct_table(table, result.fact);
  r.imputed = fill_missing(values, r.reconstruction);
  r.offsets = result.fact.mu;
  r.converged = result.converged;
  r.missing_count = count_missing(values);
  r.imputation_mse = kNaN;
  r.offset_mse = kNaN;
  return r;
}

BaselineResult pca_glrm(const Matrix& values, std::size_t k, std::uint64_t seed) {
  if (static_cast<Eigen::Index>(k) >= values.cols()) {
    // Full rank: X = A - mu (zeros where missing) with Y = I reproduces every
    // observed entry.
    const DataTable table = quadratic_table(values);
    BaselineResult r;
    r.method = "PCA";
    r.offsets = Vector(values.cols());
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      r.offsets(j) = table.columns[static_cast<std::size_t>(j)].offset[0];
    }
    const Matrix model = Matrix::Ones(values.rows(), 1) * r.offsets.transpose();
    r.imputed = fill_missing(values, model);
    r.reconstruction = r.imputed;
    r.missing_count = count_missing(values);
    r.imputation_mse = kNaN;
    r.offset_mse = kNaN;
    return r;
  }
  FitConfig config;
  config.rank = k;
  config.seed = seed;
  return quadratic_glrm(values, config, "PCA");
}

}  // namespace hurdlerank
