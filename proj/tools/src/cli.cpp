#include "hurdlerank_cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "hurdlerank/diagnostics.hpp"
#include "hurdlerank/errors.hpp"
#include "hurdlerank/io.hpp"
#include "hurdlerank/random.hpp"
#include "hurdlerank/simgen.hpp"
#include "hurdlerank/solver.hpp"
#include "hurdlerank_cli/experiments.hpp"

namespace hurdlerank::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kToolVersion = "hurdlerank 0.1.0";
constexpr double kHoldoutRate = 0.1;

struct Options {
  std::string input;
  std::string schema;
  std::optional<std::size_t> rank;
  std::optional<double> gamma;
  std::vector<double> gamma_grid;
  std::uint64_t seed = 1;
  std::size_t seeds = 1;
  std::string out;
  std::string experiment;
  std::size_t threads = 1;
  std::size_t max_sweeps = 500;
  std::size_t restarts = 1;
  std::optional<std::size_t> n;
  std::optional<std::size_t> p;
  std::optional<double> zero_rate;
  double mean_scale = 6.0;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  return out;
}

std::string model_name(const ColumnSpec& col) {
  if (col.is_hurdle()) return "hurdle";
  return std::string(to_string(col.plain()->kind));
}

json fit_config_json(const FitConfig& c) {
  return {{"rank", c.rank},
          {"gamma_x", c.gamma_x},
          {"gamma_y", c.gamma_y},
          {"max_sweeps", c.max_sweeps},
          {"rel_tol", c.rel_tol},
          {"seed", c.seed},
          {"step_halvings", c.step_halvings},
          {"restarts", c.restarts},
          {"threads", c.threads},
          {"mar_offset_columns", c.mar_offset_columns}};
}

// Runs fn(index) for every index on up to `threads` workers.
template <typename Fn>
void for_each_index(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < std::min(threads, count); ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

// ---- fit / impute -------------------------------------------------------

struct FittedRun {
  DataTable table;
  FitConfig config;
  FitResult result;
  std::optional<GammaSelection> selection;
};

FittedRun fit_from_options(const Options& o) {
  require(!o.input.empty(), "--input is required");
  require(!o.schema.empty(), "--schema is required");
  require(o.rank.has_value(), "--rank is required");
  require(!(o.gamma && !o.gamma_grid.empty()), "--gamma and --gamma-grid are exclusive");
  const json schema = read_json(o.schema);

  FittedRun run;
  run.table = calibrate(load_table(o.input, schema));
  run.config.rank = *o.rank;
  run.config.seed = o.seed;
  run.config.threads = o.threads;
  run.config.max_sweeps = o.max_sweeps;
  run.config.restarts = o.restarts;
  run.config.mar_offset_columns = mar_refresh_columns(schema);
  const std::size_t d = run.table.embedded_dim();
  require(*o.rank >= 1 && *o.rank < d,
          "--rank must satisfy 1 <= k < " + std::to_string(d) + " (embedded columns)");
  if (!o.gamma_grid.empty()) {
    run.selection = select_gamma(run.table, run.config, o.gamma_grid, kHoldoutRate, o.seed);
    run.config.set_gamma(run.selection->gamma);
  } else {
    run.config.set_gamma(o.gamma.value_or(0.0));
  }
  run.result = fit(run.table, run.config);
  return run;
}

json column_metrics(const ColumnSpec& col) {
  json j = {{"name", col.name}, {"model", model_name(col)}, {"offset", col.offset}};
  if (const auto* h = col.hurdle()) {
    j["lambda1"] = h->lambda1;
    j["lambda2"] = h->lambda2;
    j["nu"] = h->nu.is_missing() ? json("missing") : json(h->nu.literal());
    j["mode"] = h->mode == HurdleMode::full ? "full" : "reduced";
  } else {
    j["scale"] = col.scale;
  }
  return j;
}

void write_hurdle_diagnostics(const fs::path& dir, const FittedRun& run) {
  const auto& fact = run.result.fact;
  const auto labels = embedded_labels(fact.column_layout);
  for (std::size_t j = 0; j < run.table.n_cols(); ++j) {
    const auto& col = run.table.columns[j];
    if (!col.is_hurdle()) continue;
    const std::string label = col.embed_dim() == 2 ? col.name + ":1" : col.name;

    std::ostringstream assoc;
    assoc << "column,theta,distance,defined\n";
    if (labels.size() > 1 && fact.Y.col(static_cast<Eigen::Index>(fact.column_layout[j].start)).norm() > 0.0) {
      for (const auto& row : column_association(fact, label)) {
        assoc << row.column << ',' << format_double(row.theta) << ',' << format_double(row.distance)
              << ',' << (row.defined ? 1 : 0) << '\n';
      }
    }
    write_text(dir / ("associations_" + col.name + ".csv"), assoc.str());

    std::ostringstream scores;
    scores << "row,nu_probability\n";
    const auto s = nu_scores(run.table, fact, j);
    for (std::size_t i = 0; i < s.size(); ++i) scores << i << ',' << format_double(s[i]) << '\n';
    write_text(dir / ("nu_scores_" + col.name + ".csv"), scores.str());
  }
}

std::vector<std::string> column_names(const DataTable& table) {
  std::vector<std::string> names;
  for (const auto& c : table.columns) names.push_back(c.name);
  return names;
}

json run_config_json(const Options& o, const FittedRun& run) {
  json j = {{"input", o.input},
            {"input_fnv1a", hex64(fnv1a64(read_file(o.input)))},
            {"schema", o.schema},
            {"schema_fnv1a", hex64(fnv1a64(read_file(o.schema)))},
            {"fit", fit_config_json(run.config)},
            {"gamma_grid", o.gamma_grid}};
  return j;
}

int cmd_fit(const Options& o, bool impute, std::ostream& out) {
  require(!o.out.empty(), "--out is required");
  const auto run = fit_from_options(o);
  const fs::path dir = o.out;
  fs::create_directories(dir);
  write_factorization(dir, run.table, run.result.fact);

  json metrics;
  metrics["trace"] = run.result.trace;
  metrics["sweeps"] = run.result.sweeps;
  metrics["converged"] = run.result.converged;
  metrics["objective"] = run.result.trace.back();
  metrics["data_loss"] = data_loss(run.table, run.result.fact);
  metrics["total_loss"] = run.table.total_loss();
  metrics["loss_explained"] = loss_explained(run.table, run.result.fact);
  metrics["gamma"] = run.config.gamma_x;
  if (run.selection) {
    metrics["gamma_selection"] = {{"grid", run.selection->grid},
                                  {"holdout_mse", run.selection->holdout_mse},
                                  {"holdout_count", run.selection->holdout_count}};
  }
  metrics["columns"] = json::array();
  for (const auto& col : run.table.columns) metrics["columns"].push_back(column_metrics(col));
  metrics["conditioning_warnings"] = conditioning_warnings();
  write_json(dir / "metrics.json", metrics);

  write_csv(dir / "reconstruction.csv", column_names(run.table),
            reconstruct_table(run.table, run.result.fact));
  write_hurdle_diagnostics(dir, run);

  if (impute) {
    // Missing-nu hurdle columns impute the best non-nu value; other columns
    // use their reconstruction.
    const Matrix decision = reconstruct_table(run.table, run.result.fact);
    const Matrix imputation =
        reconstruct_table(run.table, run.result.fact, ReconstructionMode::imputation);
    Matrix filled = run.table.values;
    for (std::size_t j = 0; j < run.table.n_cols(); ++j) {
      const auto* h = run.table.columns[j].hurdle();
      const Matrix& source = h != nullptr && h->nu.is_missing() ? imputation : decision;
      const auto c = static_cast<Eigen::Index>(j);
      for (Eigen::Index i = 0; i < filled.rows(); ++i) {
        if (std::isnan(filled(i, c))) filled(i, c) = source(i, c);
      }
    }
    write_csv(dir / "imputed.csv", column_names(run.table), filled);
  }

  write_manifest(dir, impute ? "impute" : "fit", run_config_json(o, run));
  out << "loss_explained " << format_double(metrics["loss_explained"].get<double>()) << '\n';
  return kExitOk;
}

// ---- simulate -----------------------------------------------------------

json mar_schema() {
  json cols = json::array();
  cols.push_back({{"name", "y1"},
                  {"loss", "hurdle"},
                  {"nu", "missing"},
                  {"binary_loss", "logistic"},
                  {"g_loss", "quadratic"},
                  {"mode", "full"},
                  {"mar_offset_refresh", true}});
  return cols;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  require(!o.out.empty(), "--out is required");
  const std::string kind = o.experiment.empty() ? "mar" : o.experiment;
  const fs::path dir = o.out;
  json config = {{"experiment", kind}, {"seed", o.seed}};
  json extra = {{"generator", std::string(Rng::kName)}};

  if (kind == "mar") {
    const std::size_t n = o.n.value_or(5000);
    const std::size_t p = o.p.value_or(10);
    const std::size_t k = o.rank.value_or(4);
    require(n >= 10 && p >= 3 && k >= 1, "mar simulation needs n >= 10, p >= 3, rank >= 1");
    fs::create_directories(dir);
    const auto b = simulate_mar_dataset(o.seed, n, p, k);
    std::vector<std::string> header;
    for (std::size_t j = 0; j < p; ++j) header.push_back("y" + std::to_string(j + 1));
    write_csv(dir / "complete.csv", header, b.complete);
    write_csv(dir / "mcar.csv", header, b.masked(b.mcar_mask));
    write_csv(dir / "mar.csv", header, b.masked(b.mar_mask));
    std::vector<std::string> w_header;
    for (std::size_t c = 0; c < k; ++c) w_header.push_back("w" + std::to_string(c + 1));
    write_csv(dir / "truth_W.csv", w_header, b.truth_W);
    write_json(dir / "truth.json", {{"mu", std::vector<double>(b.truth_mu.begin(), b.truth_mu.end())},
                                    {"sigma_sq", std::vector<double>(b.truth_sigma.begin(),
                                                                     b.truth_sigma.end())}});
    json cols = mar_schema();
    for (std::size_t j = 1; j < p; ++j) {
      cols.push_back({{"name", header[j]}, {"loss", "quadratic"}});
    }
    write_json(dir / "schema.json", {{"columns", cols}});
    config.update({{"n", n}, {"p", p}, {"k_true", k}});
    extra.update({{"alpha", b.alpha},
                  {"mcar_missing", b.mcar_count()},
                  {"mar_missing", b.mar_count()},
                  {"mcar_probability", mcar_missing_probability()}});
    out << "alpha " << format_double(b.alpha) << " mcar " << b.mcar_count() << " mar "
        << b.mar_count() << '\n';
  } else if (kind == "zero_inflated") {
    const std::size_t n = o.n.value_or(1000);
    const std::size_t p = o.p.value_or(20);
    const std::size_t k = o.rank.value_or(4);
    require(n >= 2 && p >= 1 && k >= 1, "zero_inflated simulation needs n >= 2, p >= 1, rank >= 1");
    require(o.mean_scale > 0.0, "--mean-scale must be positive");
    std::vector<double> rates = default_zero_rates(p);
    if (o.zero_rate) {
      require(*o.zero_rate > 0.0 && *o.zero_rate < 1.0, "--zero-rate must lie in (0, 1)");
      rates.assign(p, *o.zero_rate);
    }
    fs::create_directories(dir);
    const Matrix counts = simulate_zero_inflated(o.seed, n, p, k, rates, o.mean_scale);
    std::vector<std::string> header;
    json cols = json::array();
    for (std::size_t j = 0; j < p; ++j) {
      header.push_back("v" + std::to_string(j + 1));
      cols.push_back({{"name", header.back()},
                      {"loss", "hurdle"},
                      {"nu", 0},
                      {"binary_loss", "logistic"},
                      {"g_loss", "truncated_poisson"},
                      {"mode", "full"}});
    }
    write_csv(dir / "counts.csv", header, counts);
    write_json(dir / "schema.json", {{"columns", cols}});
    config.update({{"n", n}, {"p", p}, {"k_true", k}, {"mean_scale", o.mean_scale},
                   {"zero_rates", rates}});
    extra["zero_fraction"] = (counts.array() == 0.0).cast<double>().mean();
  } else {
    throw DomainError("unknown simulation '" + kind + "' (expected mar or zero_inflated)");
  }
  write_manifest(dir, "simulate", config, extra);
  return kExitOk;
}

// ---- experiment ---------------------------------------------------------

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

bool in_top(const std::vector<AssociationRow>& rows, std::size_t top,
            const std::set<std::string>& wanted) {
  for (std::size_t r = 0; r < std::min(top, rows.size()); ++r) {
    if (wanted.contains(rows[r].column)) return true;
  }
  return false;
}

int cmd_mar_table1(const Options& o, const fs::path& dir, std::ostream& out) {
  MarExperimentConfig cfg;
  cfg.rank = o.rank.value_or(4);
  if (!o.gamma_grid.empty()) cfg.gamma_grid = o.gamma_grid;
  if (o.gamma) cfg.gamma_grid = {*o.gamma};
  cfg.n = o.n.value_or(5000);
  cfg.p = o.p.value_or(10);
  require(cfg.p >= 3 && cfg.n >= 50, "mar_table1 needs n >= 50 and p >= 3");
  require(o.seeds >= 1, "--seeds must be at least 1");

  std::vector<MarSeedResult> results(o.seeds);
  for_each_index(o.seeds, o.threads, [&](std::size_t s) {
    results[s] = run_mar_seed(o.seed + s, cfg);
  });

  std::ostringstream per_seed, roc_mcar, roc_mar, assoc, auc;
  per_seed << "seed,scenario,method,imputation_mse,offset_mse\n";
  roc_mcar << "seed,fpr,tpr\n";
  roc_mar << "seed,fpr,tpr\n";
  assoc << "seed,scenario,position,column,theta,distance\n";
  auc << "seed,alpha,mcar_missing,mar_missing,mcar_auc,mar_auc,mcar_loss_explained,"
         "mar_loss_explained,mcar_gamma,mar_gamma\n";
  std::map<std::pair<std::string, std::string>, std::vector<double>> imp, off;
  std::vector<std::string> order;
  std::vector<double> auc_mcar, auc_mar, le_mar, le_mcar;
  std::size_t top2 = 0, top3 = 0;
  const std::set<std::string> wanted = {"y2", "y3"};
  for (const auto& r : results) {
    for (const auto* sc : {&r.mcar, &r.mar}) {
      for (const auto& m : sc->methods) {
        if (std::find(order.begin(), order.end(), m.method) == order.end()) order.push_back(m.method);
        imp[{m.method, sc->scenario}].push_back(m.imputation_mse);
        off[{m.method, sc->scenario}].push_back(m.offset_mse);
        per_seed << r.seed << ',' << sc->scenario << ',' << m.method << ','
                 << format_double(m.imputation_mse) << ',' << format_double(m.offset_mse) << '\n';
      }
      auto& roc = sc == &r.mcar ? roc_mcar : roc_mar;
      for (const auto& pt : sc->roc.points) {
        roc << r.seed << ',' << format_double(pt.fpr) << ',' << format_double(pt.tpr) << '\n';
      }
      for (std::size_t i = 0; i < sc->associations.size(); ++i) {
        const auto& a = sc->associations[i];
        assoc << r.seed << ',' << sc->scenario << ',' << i + 1 << ',' << a.column << ','
              << format_double(a.theta) << ',' << format_double(a.distance) << '\n';
      }
    }
    auc_mcar.push_back(r.mcar.roc.auc);
    auc_mar.push_back(r.mar.roc.auc);
    le_mcar.push_back(r.mcar.loss_explained);
    le_mar.push_back(r.mar.loss_explained);
    top2 += in_top(r.mar.associations, 2, wanted) ? 1 : 0;
    top3 += in_top(r.mar.associations, 3, wanted) ? 1 : 0;
    auc << r.seed << ',' << format_double(r.alpha) << ',' << r.mcar_count << ',' << r.mar_count
        << ',' << format_double(r.mcar.roc.auc) << ',' << format_double(r.mar.roc.auc) << ','
        << format_double(r.mcar.loss_explained) << ',' << format_double(r.mar.loss_explained)
        << ',' << format_double(r.mcar.hurdle_gamma) << ',' << format_double(r.mar.hurdle_gamma)
        << '\n';
  }

  std::ostringstream table;
  table << "method,scenario,average_imputation_mse,average_offset_mse\n";
  json methods = json::array();
  for (const auto& m : order) {
    for (const std::string sc : {"MCAR", "MAR"}) {
      const double i = mean_of(imp[{m, sc}]);
      const double f = mean_of(off[{m, sc}]);
      table << m << ',' << sc << ',' << format_double(i) << ',' << format_double(f) << '\n';
      methods.push_back({{"method", m}, {"scenario", sc}, {"average_imputation_mse", i},
                         {"average_offset_mse", f}});
    }
  }
  const double seeds = static_cast<double>(results.size());
  json summary = {{"seeds", results.size()},
                  {"methods", methods},
                  {"average_auc_mcar", mean_of(auc_mcar)},
                  {"average_auc_mar", mean_of(auc_mar)},
                  {"average_loss_explained_mcar", mean_of(le_mcar)},
                  {"average_loss_explained_mar", mean_of(le_mar)},
                  {"y2_or_y3_top_two_fraction", static_cast<double>(top2) / seeds},
                  {"y2_or_y3_top_three_fraction", static_cast<double>(top3) / seeds}};

  write_text(dir / "table1.csv", table.str());
  write_json(dir / "table1.json", summary);
  write_text(dir / "per_seed.csv", per_seed.str());
  write_text(dir / "roc_mcar.csv", roc_mcar.str());
  write_text(dir / "roc_mar.csv", roc_mar.str());
  write_text(dir / "associations.csv", assoc.str());
  write_text(dir / "seeds.csv", auc.str());
  out << table.str();

  json config = {{"experiment", "mar_table1"}, {"seed", o.seed}, {"seeds", o.seeds},
                 {"rank", cfg.rank},          {"n", cfg.n},     {"p", cfg.p},
                 {"gamma_grid", cfg.gamma_grid}, {"holdout_rate", cfg.holdout_rate}};
  write_manifest(dir, "experiment", config, {{"generator", std::string(Rng::kName)}});
  return kExitOk;
}

int cmd_zero_inflated_fig1(const Options& o, const fs::path& dir, std::ostream& out) {
  ZeroInflatedConfig cfg;
  cfg.n = o.n.value_or(cfg.n);
  cfg.p = o.p.value_or(cfg.p);
  cfg.mean_scale = o.mean_scale;
  cfg.gamma = o.gamma.value_or(0.0);
  require(o.gamma_grid.empty(), "zero_inflated_fig1 takes --gamma, not --gamma-grid");
  const std::size_t max_rank = o.rank.value_or(10);
  require(max_rank >= 1 && max_rank < cfg.p, "--rank must satisfy 1 <= k < p");
  require(o.seeds >= 1, "--seeds must be at least 1");
  cfg.ranks.clear();
  for (std::size_t k = 1; k <= max_rank; ++k) cfg.ranks.push_back(k);

  std::vector<std::vector<ZeroInflatedPoint>> results(o.seeds);
  for_each_index(o.seeds, o.threads, [&](std::size_t s) {
    results[s] = run_zero_inflated(o.seed + s, cfg);
  });

  std::ostringstream le, sse, mis;
  le << "k,hurdle,pca\n";
  sse << "k,hurdle,pca\n";
  mis << "k,hurdle,pca\n";
  json points = json::array();
  for (std::size_t r = 0; r < cfg.ranks.size(); ++r) {
    std::vector<double> v[6];
    for (const auto& seed : results) {
      const auto& pt = seed[r];
      v[0].push_back(pt.hurdle_loss_explained);
      v[1].push_back(pt.pca_loss_explained);
      v[2].push_back(pt.hurdle_weighted_sse);
      v[3].push_back(pt.pca_weighted_sse);
      v[4].push_back(pt.hurdle_misclassification);
      v[5].push_back(pt.pca_misclassification);
    }
    double m[6];
    for (int i = 0; i < 6; ++i) m[i] = mean_of(v[i]);
    const auto k = cfg.ranks[r];
    le << k << ',' << format_double(m[0]) << ',' << format_double(m[1]) << '\n';
    sse << k << ',' << format_double(m[2]) << ',' << format_double(m[3]) << '\n';
    mis << k << ',' << format_double(m[4]) << ',' << format_double(m[5]) << '\n';
    points.push_back({{"k", k},
                      {"hurdle_loss_explained", m[0]},
                      {"pca_loss_explained", m[1]},
                      {"hurdle_weighted_sse", m[2]},
                      {"pca_weighted_sse", m[3]},
                      {"hurdle_misclassification", m[4]},
                      {"pca_misclassification", m[5]}});
  }
  write_text(dir / "loss_explained.csv", le.str());
  write_text(dir / "weighted_sse.csv", sse.str());
  write_text(dir / "misclassification.csv", mis.str());
  write_json(dir / "fig1.json", {{"seeds", o.seeds}, {"points", points}});
  out << mis.str();

  json config = {{"experiment", "zero_inflated_fig1"},
                 {"seed", o.seed},
                 {"seeds", o.seeds},
                 {"n", cfg.n},
                 {"p", cfg.p},
                 {"k_true", cfg.k_true},
                 {"mean_scale", cfg.mean_scale},
                 {"gamma", cfg.gamma},
                 {"ranks", cfg.ranks}};
  write_manifest(dir, "experiment", config, {{"generator", std::string(Rng::kName)}});
  return kExitOk;
}

int cmd_experiment(const Options& o, std::ostream& out) {
  require(!o.out.empty(), "--out is required");
  const fs::path dir = o.out;
  if (o.experiment == "mar_table1") {
    fs::create_directories(dir);
    return cmd_mar_table1(o, dir, out);
  }
  if (o.experiment == "zero_inflated_fig1") {
    fs::create_directories(dir);
    return cmd_zero_inflated_fig1(o, dir, out);
  }
  throw DomainError("--experiment must be mar_table1 or zero_inflated_fig1");
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

DataTable load_table(const fs::path& input, const json& schema) {
  if (!schema.is_object() || !schema.contains("columns") || !schema["columns"].is_array()) {
    throw DomainError("schema must be an object with a 'columns' array");
  }
  const auto csv = read_csv(input);
  std::map<std::string, std::size_t> header_index;
  for (std::size_t c = 0; c < csv.header.size(); ++c) {
    if (!header_index.emplace(csv.header[c], c).second) {
      throw DomainError("CSV header repeats column '" + csv.header[c] + "'");
    }
  }
  DataTable table;
  std::vector<Eigen::Index> order;
  std::set<std::string> seen;
  for (const auto& entry : schema["columns"]) {
    auto col = column_from_json(entry);
    if (!seen.insert(col.name).second) {
      throw DomainError("schema lists column '" + col.name + "' twice");
    }
    const auto it = header_index.find(col.name);
    if (it == header_index.end()) {
      throw DomainError("schema column '" + col.name + "' is not in the CSV header");
    }
    order.push_back(static_cast<Eigen::Index>(it->second));
    table.columns.push_back(std::move(col));
  }
  for (const auto& name : csv.header) {
    if (!seen.contains(name)) throw DomainError("CSV column '" + name + "' has no schema entry");
  }
  table.values = csv.values(Eigen::all, order);
  table.validate();
  return table;
}

std::vector<std::string> mar_refresh_columns(const json& schema) {
  std::vector<std::string> out;
  for (const auto& entry : schema.at("columns")) {
    if (entry.contains("mar_offset_refresh")) {
      if (!entry["mar_offset_refresh"].is_boolean()) {
        throw DomainError("'mar_offset_refresh' must be true or false");
      }
      if (entry["mar_offset_refresh"].get<bool>()) out.push_back(entry.at("name").get<std::string>());
    }
  }
  return out;
}

void write_manifest(const fs::path& dir, std::string_view command, const json& config,
                    const json& extra) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir);
    if (rel == "manifest.json") continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  json listing = json::array();
  for (const auto& rel : files) {
    const auto bytes = read_file(dir / rel);
    listing.push_back({{"path", rel.generic_string()},
                       {"bytes", bytes.size()},
                       {"fnv1a64", hex64(fnv1a64(bytes))}});
  }
  json manifest = {{"tool", std::string(kToolVersion)},
                   {"command", std::string(command)},
                   {"config", config},
                   {"config_hash", hex64(fnv1a64(config.dump()))},
                   {"files", listing}};
  if (extra.is_object()) manifest.update(extra);
  write_json(dir / "manifest.json", manifest);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-rank models with hurdle losses", "hurdlerank"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--rank", o.rank, "Rank k");
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto add_fit = [&](CLI::App* sub) {
    add_common(sub);
    sub->add_option("--input", o.input, "Input CSV");
    sub->add_option("--schema", o.schema, "Column schema (JSON)");
    sub->add_option("--gamma", o.gamma, "Regularization weight")->check(CLI::NonNegativeNumber);
    sub->add_option("--gamma-grid", o.gamma_grid, "Grid for held-out gamma selection")
        ->delimiter(',');
    sub->add_option("--max-sweeps", o.max_sweeps, "Sweep limit");
    sub->add_option("--restarts", o.restarts, "Random restarts")->check(CLI::PositiveNumber);
  };

  auto* fit_cmd = app.add_subcommand("fit", "Fit a model and write its factorization");
  add_fit(fit_cmd);
  auto* impute_cmd = app.add_subcommand("impute", "Fit a model and fill missing entries");
  add_fit(impute_cmd);
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset");
  add_common(sim_cmd);
  sim_cmd->add_option("--experiment", o.experiment, "mar or zero_inflated");
  sim_cmd->add_option("--n", o.n, "Rows");
  sim_cmd->add_option("--p", o.p, "Columns");
  sim_cmd->add_option("--zero-rate", o.zero_rate, "Common zero rate for zero_inflated");
  sim_cmd->add_option("--mean-scale", o.mean_scale, "Count scale for zero_inflated");
  auto* exp_cmd = app.add_subcommand("experiment", "Run a replication experiment");
  add_common(exp_cmd);
  exp_cmd->add_option("--experiment", o.experiment, "mar_table1 or zero_inflated_fig1")->required();
  exp_cmd->add_option("--seeds", o.seeds, "Number of consecutive seeds");
  exp_cmd->add_option("--gamma", o.gamma, "Fixed gamma")->check(CLI::NonNegativeNumber);
  exp_cmd->add_option("--gamma-grid", o.gamma_grid, "Gamma grid")->delimiter(',');
  exp_cmd->add_option("--n", o.n, "Rows per dataset");
  exp_cmd->add_option("--p", o.p, "Columns per dataset");
  exp_cmd->add_option("--mean-scale", o.mean_scale, "Count scale for zero_inflated_fig1");

  // CLI11 consumes a reversed argument list without the program name.
  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(o, false, out);
    if (impute_cmd->parsed()) return cmd_fit(o, true, out);
    if (sim_cmd->parsed()) return cmd_simulate(o, out);
    return cmd_experiment(o, out);
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DegenerateColumn& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace hurdlerank::cli
