#include "hurdlerank/solver.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "hurdlerank/errors.hpp"
#include "hurdlerank/random.hpp"
#include "parallel.hpp"
#include "safeguarded_newton.hpp"

namespace hurdlerank {

namespace {

constexpr double kCurvatureFloor = 1e-8;

// Neumaier-compensated running sum; keeps the sweep objective reproducible
// to well below the descent tolerance.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      correction_ += (sum_ - t) + v;
    } else {
      correction_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + correction_; }

 private:
  double sum_ = 0.0;
  double correction_ = 0.0;
};

struct Problem {
  const DataTable& table;
  const FitConfig& config;
  std::vector<EmbeddedSpan> layout;
};

double value_at(const DataTable& table, std::size_t i, std::size_t j) {
  return table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

// Loss of row i at x (data terms plus gamma_x ||x||^2).
double row_value(const Problem& p, const Matrix& Y, const Vector& mu, std::size_t i,
                 const Vector& x) {
  CompensatedSum sum;
  std::array<double, 2> z{};
  for (const auto& span : p.layout) {
    const double a = value_at(p.table, i, span.column);
    const auto& col = p.table.columns[span.column];
    if (!col.contributes(a)) continue;
    for (std::size_t s = 0; s < span.dim; ++s) {
      const auto e = static_cast<Eigen::Index>(span.start + s);
      z[s] = x.dot(Y.col(e)) + mu(e);
    }
    sum.add(col.entry_loss(std::span<const double>(z.data(), span.dim), a));
  }
  sum.add(p.config.gamma_x * x.squaredNorm());
  return sum.value();
}

// Solves H step = -grad with a floored diagonal; falls back to a scaled
// gradient step when the factorization fails.
Vector newton_direction(Matrix hessian, const Vector& grad) {
  hessian.diagonal().array() += kCurvatureFloor;
  Eigen::LDLT<Matrix> ldlt(hessian);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    Vector step = ldlt.solve(-grad);
    if (step.allFinite()) return step;
  }
  const double diag = std::max(hessian.diagonal().maxCoeff(), kCurvatureFloor);
  return -grad / diag;
}

// Step halving from the full Newton step; returns the accepted point or
// `start` when no trial point improves on `f0`.
template <class Eval>
Vector damped_step(const Vector& start, const Vector& step, double f0, int budget, Eval&& eval) {
  double t = 1.0;
  for (int h = 0; h <= budget; ++h) {
    Vector trial = start + t * step;
    const double f = eval(trial);
    if (std::isfinite(f) && f <= f0) return trial;
    t *= 0.5;
  }
  return start;
}

void update_row(const Problem& p, Matrix& X, const Matrix& Y, const Vector& mu, std::size_t i) {
  const auto k = X.cols();
  const Vector x = X.row(static_cast<Eigen::Index>(i)).transpose();
  Vector grad = 2.0 * p.config.gamma_x * x;
  Matrix hessian = Matrix::Identity(k, k) * (2.0 * p.config.gamma_x);
  std::array<double, 2> z{};
  for (const auto& span : p.layout) {
    const double a = value_at(p.table, i, span.column);
    const auto& col = p.table.columns[span.column];
    if (!col.contributes(a)) continue;
    for (std::size_t s = 0; s < span.dim; ++s) {
      const auto e = static_cast<Eigen::Index>(span.start + s);
      z[s] = x.dot(Y.col(e)) + mu(e);
    }
    const auto d = col.entry_deriv(std::span<const double>(z.data(), span.dim), a);
    for (std::size_t s = 0; s < span.dim; ++s) {
      const auto e = static_cast<Eigen::Index>(span.start + s);
      grad.noalias() += d.gradient[s] * Y.col(e);
      hessian.noalias() += std::max(d.curvature[s], 0.0) * Y.col(e) * Y.col(e).transpose();
    }
  }
  const Vector step = newton_direction(hessian, grad);
  const double f0 = row_value(p, Y, mu, i, x);
  const Vector next = damped_step(x, step, f0, p.config.step_halvings,
                                  [&](const Vector& trial) { return row_value(p, Y, mu, i, trial); });
  X.row(static_cast<Eigen::Index>(i)) = next.transpose();
}

// Loss of embedded column `slot` of `span` at y, with the other slots of the
// span held at their current values.
double embedded_column_value(const Problem& p, const Matrix& X, const Matrix& Y, const Vector& mu,
                             const EmbeddedSpan& span, std::size_t slot, const Vector& y) {
  const auto& col = p.table.columns[span.column];
  CompensatedSum sum;
  std::array<double, 2> z{};
  for (std::size_t i = 0; i < p.table.n_rows(); ++i) {
    const double a = value_at(p.table, i, span.column);
    if (!col.contributes(a)) continue;
    const auto xi = X.row(static_cast<Eigen::Index>(i));
    for (std::size_t s = 0; s < span.dim; ++s) {
      const auto e = static_cast<Eigen::Index>(span.start + s);
      z[s] = (s == slot ? xi.dot(y) : xi.dot(Y.col(e))) + mu(e);
    }
    sum.add(col.entry_loss(std::span<const double>(z.data(), span.dim), a));
  }
  sum.add(p.config.gamma_y * y.squaredNorm());
  return sum.value();
}

// Reads every embedded column from `Y`; writes only column `slot` of `out`.
void update_embedded_column(const Problem& p, const Matrix& X, const Matrix& Y, Matrix& out,
                            const Vector& mu, const EmbeddedSpan& span, std::size_t slot) {
  const auto k = X.cols();
  const auto e_self = static_cast<Eigen::Index>(span.start + slot);
  const auto& col = p.table.columns[span.column];
  const Vector y = Y.col(e_self);
  Vector grad = 2.0 * p.config.gamma_y * y;
  Matrix hessian = Matrix::Identity(k, k) * (2.0 * p.config.gamma_y);
  std::array<double, 2> z{};
  for (std::size_t i = 0; i < p.table.n_rows(); ++i) {
    const double a = value_at(p.table, i, span.column);
    if (!col.contributes(a)) continue;
    const auto xi = X.row(static_cast<Eigen::Index>(i));
    for (std::size_t s = 0; s < span.dim; ++s) {
      const auto e = static_cast<Eigen::Index>(span.start + s);
      z[s] = xi.dot(Y.col(e)) + mu(e);
    }
    const auto d = col.entry_deriv(std::span<const double>(z.data(), span.dim), a);
    grad.noalias() += d.gradient[slot] * xi.transpose();
    hessian.noalias() += std::max(d.curvature[slot], 0.0) * xi.transpose() * xi;
  }
  const Vector step = newton_direction(hessian, grad);
  const double f0 = embedded_column_value(p, X, Y, mu, span, slot, y);
  const Vector next =
      damped_step(y, step, f0, p.config.step_halvings, [&](const Vector& trial) {
        return embedded_column_value(p, X, Y, mu, span, slot, trial);
      });
  out.col(e_self) = next;
}

double objective_impl(const Problem& p, const Factorization& f) {
  std::vector<double> rows(p.table.n_rows());
  detail::parallel_for(p.table.n_rows(), p.config.threads, [&](std::size_t i) {
    rows[i] = row_value(p, f.Y, f.mu, i, f.X.row(static_cast<Eigen::Index>(i)).transpose());
  });
  CompensatedSum sum;
  for (double r : rows) sum.add(r);
  sum.add(p.config.gamma_y * f.Y.squaredNorm());
  return sum.value();
}

std::size_t value_slot(const ColumnSpec& col) {
  if (const auto* h = col.hurdle()) {
    if (h->mode != HurdleMode::full || h->g_loss.kind != LossKind::quadratic) {
      throw DomainError("offset refresh needs a full hurdle column with quadratic value loss: " +
                        col.name);
    }
    return 1;
  }
  if (col.plain()->kind != LossKind::quadratic) {
    throw DomainError("offset refresh needs a quadratic column: " + col.name);
  }
  return 0;
}

void check_fit_inputs(const DataTable& table, const FitConfig& config) {
  table.validate();
  const auto d = table.embedded_dim();
  if (config.rank < 1 || config.rank >= d) {
    throw DomainError("rank must satisfy 1 <= k < d (k = " + std::to_string(config.rank) +
                      ", d = " + std::to_string(d) + ")");
  }
  if (!(config.rel_tol > 0.0)) throw DomainError("rel_tol must be positive");
  if (config.gamma_x < 0.0 || config.gamma_y < 0.0) {
    throw DomainError("regularization weights must be nonnegative");
  }
  if (config.restarts < 1) throw DomainError("restarts must be at least 1");
}

std::vector<std::size_t> refresh_columns(const DataTable& table, const FitConfig& config) {
  std::vector<std::size_t> out;
  for (const auto& name : config.mar_offset_columns) {
    const auto j = table.find_column(name);
    if (!j) throw DomainError("offset refresh names unknown column " + name);
    value_slot(table.columns[*j]);
    out.push_back(*j);
  }
  return out;
}

FitResult run_fit(const DataTable& table, const FitConfig& config, Factorization fact) {
  const Problem p{table, config, table.layout()};
  const auto refresh = refresh_columns(table, config);

  FitResult result;
  double current = objective_impl(p, fact);
  if (!std::isfinite(current)) throw NumericFailure("objective is non-finite at initialization");
  result.trace.push_back(current);

  struct Slot {
    const EmbeddedSpan* span;
    std::size_t slot;
  };
  std::vector<Slot> slots;
  for (const auto& span : p.layout) {
    for (std::size_t s = 0; s < span.dim; ++s) slots.push_back({&span, s});
  }

  for (std::size_t sweep = 1; sweep <= config.max_sweeps; ++sweep) {
    detail::parallel_for(table.n_rows(), config.threads,
                         [&](std::size_t i) { update_row(p, fact.X, fact.Y, fact.mu, i); });
    // Embedded columns are updated from a snapshot: full hurdle columns are
    // separable across their two slots, so this matches in-place updates.
    const Matrix y_snapshot = fact.Y;
    detail::parallel_for(slots.size(), config.threads, [&](std::size_t e) {
      update_embedded_column(p, fact.X, y_snapshot, fact.Y, fact.mu, *slots[e].span,
                             slots[e].slot);
    });
    for (std::size_t j : refresh) mar_offset_refresh(table, fact, j);

    const double next = objective_impl(p, fact);
    if (!std::isfinite(next)) {
      throw NumericFailure("objective became non-finite at sweep " + std::to_string(sweep));
    }
    result.trace.push_back(next);
    result.sweeps = sweep;
    const double change = (current - next) / std::max(std::abs(current), 1e-300);
    current = next;
    if (change < config.rel_tol) {
      result.converged = true;
      break;
    }
  }
  result.fact = std::move(fact);
  return result;
}

}  // namespace

void Factorization::embedding(std::size_t i, const EmbeddedSpan& span, std::span<double> out) const {
  const auto xi = X.row(static_cast<Eigen::Index>(i));
  for (std::size_t s = 0; s < span.dim; ++s) {
    const auto e = static_cast<Eigen::Index>(span.start + s);
    out[s] = xi.dot(Y.col(e)) + mu(e);
  }
}

void Factorization::validate(std::size_t n_rows) const {
  std::size_t d = 0;
  for (const auto& span : column_layout) d += span.dim;
  if (static_cast<std::size_t>(X.rows()) != n_rows || X.cols() != Y.rows() ||
      static_cast<std::size_t>(Y.cols()) != d || mu.size() != Y.cols()) {
    throw DomainError("factorization dimensions are inconsistent");
  }
  if (!X.allFinite() || !Y.allFinite() || !mu.allFinite()) {
    throw DomainError("factorization has non-finite entries");
  }
}

DataTable calibrate(DataTable table, const std::vector<std::optional<double>>& c_multipliers) {
  if (!c_multipliers.empty() && c_multipliers.size() != table.n_cols()) {
    throw DomainError("one c multiplier per column expected");
  }
  table.validate();
  for (std::size_t j = 0; j < table.n_cols(); ++j) {
    auto& col = table.columns[j];
    const auto column = table.values.col(static_cast<Eigen::Index>(j));
    std::vector<double> all(column.begin(), column.end());
    try {
      if (auto* h = col.hurdle()) {
        std::optional<double> c = col.c_multiplier;
        if (!c_multipliers.empty() && c_multipliers[j]) c = c_multipliers[j];
        const auto w = solve_hurdle_weights(all, h->nu, c, h->binary_loss, h->g_loss);
        h->lambda1 = w.lambda1;
        h->lambda2 = w.lambda2;
        col.scale = 1.0;
        if (h->mode == HurdleMode::full) {
          col.offset = {w.mu_b, w.mu_g};
          continue;
        }
        // Reduced: one shared offset minimizing the weighted composite, then
        // a joint rescale of both weights restores the n_j - 1 total.
        HurdleSpec spec = *h;
        const auto derivative = [&](double mu) {
          CompensatedSum grad, curv;
          for (double a : all) {
            if (!col.contributes(a)) continue;
            const auto d = hurdle_deriv(spec, std::span<const double>(&mu, 1), a);
            grad.add(d.gradient[0]);
            curv.add(d.curvature[0]);
          }
          return std::pair{grad.value(), curv.value()};
        };
        const double lo = std::min(w.mu_b, w.mu_g);
        const double hi = std::max(w.mu_b, w.mu_g);
        double shared = lo;
        if (hi > lo) {
          const auto root = detail::solve_increasing(derivative, lo, hi, 0.5 * (lo + hi), 1e-12, 500);
          if (!root) throw NumericFailure("reduced hurdle offset did not converge");
          shared = *root;
        }
        CompensatedSum total;
        for (double a : all) {
          if (col.contributes(a)) total.add(hurdle_eval(spec, std::span<const double>(&shared, 1), a));
        }
        const double factor = (static_cast<double>(w.n) - 1.0) / total.value();
        h->lambda1 *= factor;
        h->lambda2 *= factor;
        col.offset = {shared};
      } else {
        std::vector<double> observed;
        for (double a : all) {
          if (!std::isnan(a)) observed.push_back(a);
        }
        const double mu = loss_offset(*col.plain(), observed);
        col.scale = loss_scale(*col.plain(), mu, observed);
        col.offset = {mu};
      }
    } catch (const DegenerateColumn& e) {
      throw DegenerateColumn("column " + col.name + ": " + e.what());
    }
  }
  return table;
}

Factorization offset_only(const DataTable& table, std::size_t rank) {
  Factorization f;
  f.column_layout = table.layout();
  const auto d = static_cast<Eigen::Index>(table.embedded_dim());
  const auto k = static_cast<Eigen::Index>(rank);
  f.X = Matrix::Zero(static_cast<Eigen::Index>(table.n_rows()), k);
  f.Y = Matrix::Zero(k, d);
  f.mu = Vector::Zero(d);
  for (const auto& span : f.column_layout) {
    const auto& offset = table.columns[span.column].offset;
    for (std::size_t s = 0; s < span.dim && s < offset.size(); ++s) {
      f.mu(static_cast<Eigen::Index>(span.start + s)) = offset[s];
    }
  }
  return f;
}

Factorization initialize(const DataTable& table, std::size_t rank, std::uint64_t seed) {
  Factorization f = offset_only(table, rank);
  Rng rng(seed);
  const double sd = 1.0 / std::sqrt(static_cast<double>(rank));
  for (Eigen::Index i = 0; i < f.X.rows(); ++i) {
    for (Eigen::Index c = 0; c < f.X.cols(); ++c) f.X(i, c) = rng.normal(0.0, sd);
  }
  for (Eigen::Index e = 0; e < f.Y.cols(); ++e) {
    for (Eigen::Index c = 0; c < f.Y.rows(); ++c) f.Y(c, e) = rng.normal(0.0, sd);
  }
  return f;
}

double data_loss(const DataTable& table, const Factorization& fact) {
  FitConfig unregularized;
  return objective(table, unregularized, fact);
}

double objective(const DataTable& table, const FitConfig& config, const Factorization& fact) {
  fact.validate(table.n_rows());
  if (fact.column_layout.size() != table.n_cols()) {
    throw DomainError("factorization layout does not match the table");
  }
  const Problem p{table, config, fact.column_layout};
  return objective_impl(p, fact);
}

FitResult fit(const DataTable& table, const FitConfig& config) {
  check_fit_inputs(table, config);
  std::optional<FitResult> best;
  for (std::size_t r = 0; r < config.restarts; ++r) {
    auto start = initialize(table, config.rank, config.seed + r);
    auto result = run_fit(table, config, std::move(start));
    if (!best || result.trace.back() < best->trace.back()) best = std::move(result);
  }
  return std::move(*best);
}

FitResult fit_from(const DataTable& table, const FitConfig& config, Factorization start) {
  check_fit_inputs(table, config);
  start.validate(table.n_rows());
  if (start.rank() != config.rank) throw DomainError("starting factorization has the wrong rank");
  return run_fit(table, config, std::move(start));
}

double mar_offset_refresh(const DataTable& table, Factorization& fact, std::size_t column) {
  const auto& col = table.columns.at(column);
  const std::size_t slot = value_slot(col);
  const auto& span = fact.column_layout.at(column);
  const auto e = static_cast<Eigen::Index>(span.start + slot);
  CompensatedSum residual;
  std::size_t count = 0;
  for (std::size_t i = 0; i < table.n_rows(); ++i) {
    const double a = value_at(table, i, column);
    if (std::isnan(a)) continue;
    residual.add(a - fact.X.row(static_cast<Eigen::Index>(i)).dot(fact.Y.col(e)));
    ++count;
  }
  if (count == 0) throw DomainError("offset refresh on a column with no observed entries");
  fact.mu(e) = residual.value() / static_cast<double>(count);
  return fact.mu(e);
}

Matrix reconstruct_table(const DataTable& table, const Factorization& fact,
                         ReconstructionMode mode) {
  fact.validate(table.n_rows());
  Matrix out(table.values.rows(), table.values.cols());
  std::array<double, 2> z{};
  for (const auto& span : fact.column_layout) {
    const auto& col = table.columns[span.column];
    for (std::size_t i = 0; i < table.n_rows(); ++i) {
      fact.embedding(i, span, z);
      const std::span<const double> zs(z.data(), span.dim);
      double value;
      if (const auto* h = col.hurdle()) {
        value = mode == ReconstructionMode::imputation ? hurdle_imputed_value(*h, zs)
                                                       : hurdle_reconstruct(*h, zs);
      } else {
        value = loss_argmin(*col.plain(), z[0]);
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(span.column)) = value;
    }
  }
  return out;
}

GammaSelection select_gamma(const DataTable& table, const FitConfig& config,
                            std::span<const double> grid, double holdout_rate,
                            std::uint64_t seed) {
  if (grid.empty()) throw DomainError("gamma grid is empty");
  if (!(holdout_rate > 0.0 && holdout_rate < 1.0)) {
    throw DomainError("holdout rate must lie in (0, 1)");
  }
  for (double g : grid) {
    if (!(g >= 0.0)) throw DomainError("gamma grid values must be nonnegative");
  }

  // Held-out entries come from missing-nu hurdle columns with quadratic value
  // loss when present, otherwise from every plain quadratic column.
  std::vector<std::size_t> targets;
  bool missing_nu = false;
  for (std::size_t j = 0; j < table.n_cols(); ++j) {
    const auto* h = table.columns[j].hurdle();
    if (h != nullptr && h->nu.is_missing() && h->g_loss.kind == LossKind::quadratic) {
      targets.push_back(j);
    }
  }
  missing_nu = !targets.empty();
  if (!missing_nu) {
    for (std::size_t j = 0; j < table.n_cols(); ++j) {
      const auto* l = table.columns[j].plain();
      if (l != nullptr && l->kind == LossKind::quadratic) targets.push_back(j);
    }
  }
  if (targets.empty()) throw DomainError("gamma selection needs a quadratic column");

  // Rows with genuinely missing target values are dropped, so that held-out
  // entries are the only missing ones in the target columns.
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < table.n_rows(); ++i) {
    bool complete = true;
    if (missing_nu) {
      for (std::size_t j : targets) complete = complete && !std::isnan(value_at(table, i, j));
    }
    if (complete) keep.push_back(static_cast<Eigen::Index>(i));
  }
  DataTable tuning;
  tuning.columns = table.columns;
  tuning.values = table.values(keep, Eigen::all);

  struct Held {
    Eigen::Index row;
    Eigen::Index col;
    double truth;
  };
  std::vector<Held> held;
  Rng rng(seed);
  for (std::size_t j : targets) {
    const auto c = static_cast<Eigen::Index>(j);
    for (Eigen::Index i = 0; i < tuning.values.rows(); ++i) {
      const double a = tuning.values(i, c);
      if (std::isnan(a)) continue;
      if (rng.bernoulli(holdout_rate)) {
        held.push_back({i, c, a});
        tuning.values(i, c) = kMissing;
      }
    }
  }
  if (held.empty()) throw DomainError("holdout rate produced no held-out entries");
  tuning = calibrate(std::move(tuning));

  GammaSelection out;
  out.grid.assign(grid.begin(), grid.end());
  out.holdout_count = held.size();
  double best_mse = std::numeric_limits<double>::infinity();
  for (double gamma : grid) {
    FitConfig cfg = config;
    cfg.set_gamma(gamma);
    const auto result = fit(tuning, cfg);
    const Matrix imputed = reconstruct_table(tuning, result.fact, ReconstructionMode::imputation);
    double sse = 0.0;
    for (const auto& h : held) {
      const double r = imputed(h.row, h.col) - h.truth;
      sse += r * r;
    }
    const double mse = sse / static_cast<double>(held.size());
    out.holdout_mse.push_back(mse);
    if (mse < best_mse || (mse == best_mse && gamma > out.gamma)) {
      best_mse = mse;
      out.gamma = gamma;
    }
  }
  return out;
}

}  // namespace hurdlerank
