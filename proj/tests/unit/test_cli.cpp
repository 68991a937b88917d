#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "hurdlerank/io.hpp"
#include "hurdlerank/simgen.hpp"
#include "hurdlerank_cli/cli.hpp"

using namespace hurdlerank;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "hurdlerank");
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = cli::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hurdlerank_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Small MAR dataset plus its schema.
fs::path prepare(const std::string& name) {
  const auto dir = scratch_dir(name);
  const auto b = simulate_mar_dataset(5, 300, 5, 2);
  write_csv(dir / "data.csv", {"y1", "y2", "y3", "y4", "y5"}, b.masked(b.mar_mask));
  nlohmann::json schema;
  schema["columns"] = nlohmann::json::array();
  schema["columns"].push_back({{"name", "y1"},
                               {"loss", "hurdle"},
                               {"nu", "missing"},
                               {"binary_loss", "logistic"},
                               {"g_loss", "quadratic"},
                               {"mar_offset_refresh", true}});
  for (const char* c : {"y2", "y3", "y4", "y5"}) schema["columns"].push_back({{"name", c}, {"loss", "quadratic"}});
  write_json(dir / "schema.json", schema);
  return dir;
}

}  // namespace

TEST_CASE("fit writes the documented outputs deterministically") {
  const auto dir = prepare("fit");
  const std::vector<std::string> base{"fit", "--input", (dir / "data.csv").string(), "--schema",
                                      (dir / "schema.json").string(), "--rank", "2", "--gamma", "1"};
  auto a = base;
  a.insert(a.end(), {"--out", (dir / "a").string()});
  auto b = base;
  b.insert(b.end(), {"--out", (dir / "b").string()});
  const auto ra = run(a);
  INFO(ra.err);
  REQUIRE(ra.code == cli::kExitOk);
  REQUIRE(run(b).code == cli::kExitOk);
  for (const char* f : {"X.csv", "Y.csv", "mu.csv", "layout.json", "metrics.json", "reconstruction.csv",
                        "associations_y1.csv", "nu_scores_y1.csv", "manifest.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  const auto metrics = read_json(dir / "a" / "metrics.json");
  CHECK(metrics.at("loss_explained").get<double>() > 0.0);
  CHECK(metrics.at("loss_explained").get<double>() <= 1.0);
  const auto manifest = read_json(dir / "a" / "manifest.json");
  CHECK(manifest.contains("config_hash"));
  const auto fact = read_factorization(dir / "a");
  CHECK(fact.rank() == 2);
}

TEST_CASE("impute fills the missing entries") {
  const auto dir = prepare("impute");
  const auto r = run({"impute", "--input", (dir / "data.csv").string(), "--schema",
                      (dir / "schema.json").string(), "--rank", "2", "--gamma", "1", "--out",
                      (dir / "o").string()});
  INFO(r.err);
  REQUIRE(r.code == cli::kExitOk);
  const auto imputed = read_csv(dir / "o" / "imputed.csv");
  CHECK_FALSE(imputed.values.array().isNaN().any());
  const auto original = read_csv(dir / "data.csv");
  for (Eigen::Index i = 0; i < original.values.rows(); ++i) {
    if (!std::isnan(original.values(i, 0))) CHECK(imputed.values(i, 0) == original.values(i, 0));
  }
}

TEST_CASE("simulate is reproducible") {
  const auto dir = scratch_dir("sim");
  for (const char* o : {"a", "b"}) {
    const auto r = run({"simulate", "--experiment", "mar", "--n", "200", "--seed", "3", "--out",
                        (dir / o).string()});
    REQUIRE(r.code == cli::kExitOk);
  }
  for (const char* f : {"complete.csv", "mcar.csv", "mar.csv", "truth_W.csv", "schema.json", "manifest.json"}) {
    CAPTURE(f);
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  const auto z = run({"simulate", "--experiment", "zero_inflated", "--n", "100", "--p", "6", "--out",
                      (dir / "z").string()});
  CHECK(z.code == cli::kExitOk);
  CHECK(fs::exists(dir / "z" / "counts.csv"));
}

TEST_CASE("configuration errors exit with status 2") {
  const auto dir = prepare("errors");
  const auto data = (dir / "data.csv").string();
  const auto schema = (dir / "schema.json").string();
  CHECK(run({}).code == cli::kExitConfig);
  CHECK(run({"fit", "--input", data, "--schema", schema, "--out", (dir / "o").string()}).code == cli::kExitConfig);
  CHECK(run({"bogus"}).code == cli::kExitConfig);
  const auto big = run({"fit", "--input", data, "--schema", schema, "--rank", "6", "--out", (dir / "o").string()});
  CHECK(big.code == cli::kExitConfig);
  CHECK_FALSE(big.err.empty());
  CHECK(run({"fit", "--input", data, "--schema", schema, "--rank", "0", "--out", (dir / "o").string()}).code ==
        cli::kExitConfig);
  CHECK(run({"fit", "--input", (dir / "none.csv").string(), "--schema", schema, "--rank", "2", "--out", (dir / "o").string()})
            .code == cli::kExitConfig);
  CHECK(run({"simulate", "--experiment", "zero_inflated", "--zero-rate", "1.5", "--out", (dir / "z").string()})
            .code == cli::kExitConfig);

  nlohmann::json wrong = read_json(dir / "schema.json");
  wrong["columns"][2]["name"] = "absent";
  write_json(dir / "wrong.json", wrong);
  const auto named = run({"fit", "--input", data, "--schema", (dir / "wrong.json").string(), "--rank", "2", "--out",
                          (dir / "o").string()});
  CHECK(named.code == cli::kExitConfig);
  CHECK(named.err.find("absent") != std::string::npos);
}

TEST_CASE("help exits cleanly") {
  const auto r = run({"--help"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("fit") != std::string::npos);
}

TEST_CASE("FNV-1a reference digests") {
  CHECK(cli::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(cli::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(cli::fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(cli::hex64(0xabcULL) == "0000000000000abc");
}
