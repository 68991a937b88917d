#include "hurdlerank_cli/experiments.hpp"

#include <cmath>

#include "hurdlerank/errors.hpp"
#include "hurdlerank/hurdle.hpp"

namespace hurdlerank::cli {

namespace {

// Distinct stream for the holdout mask used by gamma selection.
constexpr std::uint64_t kHoldoutStream = 0x9e3779b97f4a7c15ULL;

Matrix fill_missing(const Matrix& values, const Matrix& model) {
  return values.array().isNaN().select(model, values);
}

Vector offsets_by_column(const DataTable& table, const Factorization& fact) {
  Vector out(static_cast<Eigen::Index>(table.n_cols()));
  for (std::size_t j = 0; j < table.n_cols(); ++j) {
    const auto& span = fact.column_layout[j];
    // The value component of a full hurdle column sits in its second slot.
    const std::size_t slot = span.dim == 2 ? 1 : 0;
    out(static_cast<Eigen::Index>(j)) = fact.mu(static_cast<Eigen::Index>(span.start + slot));
  }
  return out;
}

std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

std::vector<double> default_gamma_grid() { return {0.0, 0.3, 1.0, 3.0, 10.0, 30.0}; }

DataTable mar_hurdle_table(const Matrix& values) {
  DataTable table;
  table.values = values;
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    ColumnSpec col;
    col.name = "y" + std::to_string(j + 1);
    if (j == 0) {
      HurdleSpec h;
      h.nu = Nu::missing();
      h.binary_loss = LossSpec{LossKind::logistic};
      h.g_loss = LossSpec{LossKind::quadratic};
      h.mode = HurdleMode::full;
      col.model = h;
    } else {
      col.model = LossSpec{LossKind::quadratic};
    }
    table.columns.push_back(std::move(col));
  }
  return table;
}

MarScenarioResult run_mar_scenario(const MarDatasetBundle& bundle, bool mar,
                                   const MarExperimentConfig& config) {
  MarScenarioResult out;
  out.scenario = mar ? "MAR" : "MCAR";
  const Matrix values = bundle.masked(mar ? bundle.mar_mask : bundle.mcar_mask);
  const auto truth = as_span(bundle.truth_mu);
  const std::uint64_t holdout_seed = bundle.seed ^ kHoldoutStream;

  FitConfig base;
  base.rank = config.rank;
  base.seed = bundle.seed;
  base.threads = config.threads;

  // Hurdle model.
  const DataTable table = calibrate(mar_hurdle_table(values));
  FitConfig hurdle_cfg = base;
  hurdle_cfg.mar_offset_columns = {"y1"};
  const auto hurdle_sel =
      select_gamma(table, hurdle_cfg, config.gamma_grid, config.holdout_rate, holdout_seed);
  hurdle_cfg.set_gamma(hurdle_sel.gamma);
  out.hurdle_gamma = hurdle_sel.gamma;
  const auto fitted = fit(table, hurdle_cfg);
  out.trace = fitted.trace;

  BaselineResult hurdle;
  hurdle.method = "Hurdle";
  hurdle.reconstruction = reconstruct_table(table, fitted.fact, ReconstructionMode::imputation);
  hurdle.imputed = fill_missing(values, hurdle.reconstruction);
  hurdle.offsets = offsets_by_column(table, fitted.fact);
  hurdle.converged = fitted.converged;
  score_imputation(hurdle, values, bundle.complete, truth);
  out.methods.push_back(std::move(hurdle));

  const auto scores = nu_scores(table, fitted.fact, 0);
  std::vector<int> labels(scores.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = std::isnan(values(static_cast<Eigen::Index>(i), 0)) ? 1 : 0;
  }
  out.roc = roc_auc(scores, labels);
  out.associations = column_association(fitted.fact, "y1:1");
  out.loss_explained = loss_explained(table, fitted.fact);

  auto nipals = nipals_fit(values, config.rank);
  score_imputation(nipals, values, bundle.complete, truth);
  out.methods.push_back(std::move(nipals));

  auto mean = mean_impute(values);
  score_imputation(mean, values, bundle.complete, truth);
  out.methods.push_back(std::move(mean));

  // Regularized quadratic GLRM with the same offset refresh on the first column.
  FitConfig quad_cfg = base;
  quad_cfg.mar_offset_columns = {"c1"};
  const auto quad_sel = select_gamma(quadratic_table(values), quad_cfg, config.gamma_grid,
                                     config.holdout_rate, holdout_seed);
  quad_cfg.set_gamma(quad_sel.gamma);
  out.quadratic_gamma = quad_sel.gamma;
  auto quad = quadratic_glrm(values, quad_cfg);
  score_imputation(quad, values, bundle.complete, truth);
  out.methods.push_back(std::move(quad));
  return out;
}

MarSeedResult run_mar_seed(std::uint64_t seed, const MarExperimentConfig& config) {
  const auto bundle = simulate_mar_dataset(seed, config.n, config.p);
  MarSeedResult out;
  out.seed = seed;
  out.alpha = bundle.alpha;
  out.mcar_count = bundle.mcar_count();
  out.mar_count = bundle.mar_count();
  out.mcar = run_mar_scenario(bundle, false, config);
  out.mar = run_mar_scenario(bundle, true, config);
  return out;
}

DataTable zero_inflated_hurdle_table(const Matrix& counts) {
  DataTable table;
  table.values = counts;
  for (Eigen::Index j = 0; j < counts.cols(); ++j) {
    ColumnSpec col;
    col.name = "v" + std::to_string(j + 1);
    HurdleSpec h;
    h.nu = Nu::value(0.0);
    h.binary_loss = LossSpec{LossKind::logistic};
    h.g_loss = LossSpec{LossKind::truncated_poisson};
    h.mode = HurdleMode::full;
    col.model = h;
    table.columns.push_back(std::move(col));
  }
  return table;
}

std::vector<ZeroInflatedPoint> run_zero_inflated(std::uint64_t seed,
                                                 const ZeroInflatedConfig& config) {
  const auto rates = default_zero_rates(config.p);
  const Matrix counts =
      simulate_zero_inflated(seed, config.n, config.p, config.k_true, rates, config.mean_scale);
  const DataTable table = calibrate(zero_inflated_hurdle_table(counts));
  const DataTable quad = quadratic_table(counts);
  const Vector sd = column_sd(counts);
  const auto sd_span = as_span(sd);

  std::vector<ZeroInflatedPoint> points;
  for (std::size_t k : config.ranks) {
    ZeroInflatedPoint pt;
    pt.rank = k;

    FitConfig cfg;
    cfg.rank = k;
    cfg.seed = seed;
    cfg.set_gamma(config.gamma);
    const auto fitted = fit(table, cfg);
    pt.hurdle_loss_explained = loss_explained(table, fitted.fact);
    const Matrix decision = reconstruct_table(table, fitted.fact);
    pt.hurdle_weighted_sse = weighted_sse(counts, decision, sd_span);
    // Zero is predicted when the indicator probability exceeds one half.
    Matrix predicted = reconstruct_table(table, fitted.fact, ReconstructionMode::imputation);
    std::array<double, 2> z{};
    for (std::size_t j = 0; j < table.n_cols(); ++j) {
      const auto& span = fitted.fact.column_layout[j];
      for (std::size_t i = 0; i < table.n_rows(); ++i) {
        fitted.fact.embedding(i, span, z);
        if (nu_probability(z[0]) > 0.5) {
          predicted(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.0;
        }
      }
    }
    pt.hurdle_misclassification = misclassification_rate(counts, predicted, 0.0, NuRule::exact);

    const auto pca = pca_glrm(counts, k, seed);
    double pca_loss = 0.0;
    for (std::size_t j = 0; j < quad.n_cols(); ++j) {
      const auto c = static_cast<Eigen::Index>(j);
      for (Eigen::Index i = 0; i < counts.rows(); ++i) {
        const double r = pca.reconstruction(i, c) - counts(i, c);
        pca_loss += r * r / quad.columns[j].scale;
      }
    }
    pt.pca_loss_explained = 1.0 - pca_loss / quad.total_loss();
    pt.pca_weighted_sse = weighted_sse(counts, pca.reconstruction, sd_span);
    pt.pca_misclassification =
        misclassification_rate(counts, pca.reconstruction, 0.0, NuRule::numeric_threshold);
    points.push_back(pt);
  }
  return points;
}

}  // namespace hurdlerank::cli
