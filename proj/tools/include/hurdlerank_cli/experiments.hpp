#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hurdlerank/baselines.hpp"
#include "hurdlerank/diagnostics.hpp"
#include "hurdlerank/simgen.hpp"

namespace hurdlerank::cli {

std::vector<double> default_gamma_grid();

struct MarExperimentConfig {
  std::size_t rank = 4;
  std::vector<double> gamma_grid = default_gamma_grid();
  double holdout_rate = 0.1;
  std::size_t n = 5000;
  std::size_t p = 10;
  std::size_t threads = 1;
};

/// One missingness scenario (MCAR or MAR) of one generated bundle.
struct MarScenarioResult {
  std::string scenario;
  double hurdle_gamma = 0.0;
  double quadratic_gamma = 0.0;
  std::vector<BaselineResult> methods;  // Hurdle, NIPALS, SampleMean, QuadraticGLRM
  RocCurve roc;
  std::vector<AssociationRow> associations;
  double loss_explained = 0.0;
  std::vector<double> trace;
};

struct MarSeedResult {
  std::uint64_t seed = 0;
  double alpha = 0.0;
  std::size_t mcar_count = 0;
  std::size_t mar_count = 0;
  MarScenarioResult mcar;
  MarScenarioResult mar;
};

/// Hurdle table for a bundle: y1 is a full hurdle column with nu = missing,
/// logistic indicator and quadratic values; y2..yp are quadratic.
DataTable mar_hurdle_table(const Matrix& values);

MarScenarioResult run_mar_scenario(const MarDatasetBundle& bundle, bool mar,
                                   const MarExperimentConfig& config);
MarSeedResult run_mar_seed(std::uint64_t seed, const MarExperimentConfig& config);

struct ZeroInflatedConfig {
  std::size_t n = 1000;
  std::size_t p = 20;
  std::size_t k_true = 4;
  double mean_scale = 6.0;
  double gamma = 0.0;
  std::vector<std::size_t> ranks = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
};

struct ZeroInflatedPoint {
  std::size_t rank = 0;
  double hurdle_loss_explained = 0.0;
  double pca_loss_explained = 0.0;
  double hurdle_weighted_sse = 0.0;
  double pca_weighted_sse = 0.0;
  double hurdle_misclassification = 0.0;
  double pca_misclassification = 0.0;
};

/// Hurdle table with nu = 0, logistic indicator and truncated Poisson values
/// for every column.
DataTable zero_inflated_hurdle_table(const Matrix& counts);

std::vector<ZeroInflatedPoint> run_zero_inflated(std::uint64_t seed,
                                                 const ZeroInflatedConfig& config);

}  // namespace hurdlerank::cli
