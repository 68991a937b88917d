#include "hurdlerank/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hurdlerank/errors.hpp"

namespace hurdlerank {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kFactorizationFormat = "hurdlerank-factorization/1";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_field(const std::string& field, std::size_t line, std::size_t col) {
  if (field.empty()) return kMissing;
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw DomainError("line " + std::to_string(line) + ", field " + std::to_string(col + 1) +
                      ": cannot parse '" + field + "' as a number");
  }
  return v;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::string domain_name(ValueDomain d) {
  switch (d) {
    case ValueDomain::reals:
      return "reals";
    case ValueDomain::binary_pm1:
      return "binary";
    case ValueDomain::nonnegative_integers:
      return "counts";
    case ValueDomain::positive_integers:
      return "positive_counts";
  }
  return "reals";
}

LossSpec parse_loss(const json& j, const std::string& key, const std::string& column) {
  if (!j.is_string()) throw DomainError("column " + column + ": " + key + " must be a string");
  const auto kind = parse_loss_kind(j.get<std::string>());
  if (!kind) {
    throw DomainError("column " + column + ": unknown " + key + " '" + j.get<std::string>() + "'");
  }
  return LossSpec{*kind};
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw DomainError(path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  if (table.header.empty()) throw DomainError(path.string() + " has an empty header");

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != table.header.size()) {
      throw DomainError(path.string() + " line " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(table.header.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) row[c] = parse_field(fields[c], line_no, c);
    rows.push_back(std::move(row));
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
  }
  return table;
}

std::string format_double(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const Matrix& values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols()) {
    throw DomainError("CSV header and value columns differ in count");
  }
  auto out = open_out(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      out << (c ? "," : "") << format_double(values(i, c));
    }
    out << '\n';
  }
}

json column_to_json(const ColumnSpec& column) {
  json j;
  j["name"] = column.name;
  if (const auto* h = column.hurdle()) {
    j["loss"] = "hurdle";
    j["nu"] = h->nu.is_missing() ? json("missing") : json(h->nu.literal());
    j["binary_loss"] = std::string(to_string(h->binary_loss.kind));
    j["g_loss"] = std::string(to_string(h->g_loss.kind));
    j["mode"] = h->mode == HurdleMode::full ? "full" : "reduced";
    j["lambda1"] = h->lambda1;
    j["lambda2"] = h->lambda2;
    if (column.c_multiplier) j["c"] = *column.c_multiplier;
  } else {
    j["loss"] = std::string(to_string(column.plain()->kind));
    j["domain"] = domain_name(column.plain()->domain());
    j["scale"] = column.scale;
  }
  if (!column.offset.empty()) j["offset"] = column.offset;
  return j;
}

ColumnSpec column_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("column entry must be an object");
  if (!j.contains("name") || !j["name"].is_string()) {
    throw DomainError("column entry needs a string 'name'");
  }
  ColumnSpec col;
  col.name = j["name"].get<std::string>();
  if (!j.contains("loss")) throw DomainError("column " + col.name + " needs a 'loss'");
  const std::string loss = j["loss"].is_string() ? j["loss"].get<std::string>() : "";

  static const std::set<std::string> plain_keys = {"name", "loss", "domain", "scale", "offset"};
  static const std::set<std::string> hurdle_keys = {"name",   "loss",    "nu",      "binary_loss",
                                                    "g_loss", "mode",    "c",       "lambda1",
                                                    "lambda2", "offset", "domain",  "mar_offset_refresh"};
  const auto& allowed = loss == "hurdle" ? hurdle_keys : plain_keys;
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key) && key != "mar_offset_refresh") {
      throw DomainError("column " + col.name + ": unknown key '" + key + "'");
    }
  }

  if (loss == "hurdle") {
    HurdleSpec h;
    if (!j.contains("nu")) throw DomainError("column " + col.name + ": hurdle needs 'nu'");
    const auto& nu = j["nu"];
    if (nu.is_string() && nu.get<std::string>() == "missing") {
      h.nu = Nu::missing();
    } else if (nu.is_number()) {
      h.nu = Nu::value(nu.get<double>());
    } else {
      throw DomainError("column " + col.name + ": 'nu' must be a number or \"missing\"");
    }
    if (j.contains("binary_loss")) h.binary_loss = parse_loss(j["binary_loss"], "binary_loss", col.name);
    if (!j.contains("g_loss")) throw DomainError("column " + col.name + ": hurdle needs 'g_loss'");
    h.g_loss = parse_loss(j["g_loss"], "g_loss", col.name);
    if (j.contains("mode")) {
      const auto mode = j["mode"].is_string() ? j["mode"].get<std::string>() : "";
      if (mode == "full") {
        h.mode = HurdleMode::full;
      } else if (mode == "reduced") {
        h.mode = HurdleMode::reduced;
      } else {
        throw DomainError("column " + col.name + ": mode must be 'full' or 'reduced'");
      }
    }
    if (j.contains("lambda1")) h.lambda1 = j["lambda1"].get<double>();
    if (j.contains("lambda2")) h.lambda2 = j["lambda2"].get<double>();
    if (j.contains("c")) {
      if (!j["c"].is_number() || !(j["c"].get<double>() > 0.0)) {
        throw DomainError("column " + col.name + ": 'c' must be a positive number");
      }
      col.c_multiplier = j["c"].get<double>();
    }
    h.validate();
    col.model = h;
  } else {
    const auto kind = parse_loss_kind(loss);
    if (!kind) throw DomainError("column " + col.name + ": unknown loss '" + loss + "'");
    col.model = LossSpec{*kind};
    if (j.contains("domain")) {
      const auto domain = j["domain"].is_string() ? j["domain"].get<std::string>() : "";
      if (domain != domain_name(LossSpec{*kind}.domain())) {
        throw DomainError("column " + col.name + ": domain '" + domain + "' does not match " +
                          loss + " loss");
      }
    }
    if (j.contains("scale")) col.scale = j["scale"].get<double>();
  }
  if (j.contains("offset")) col.offset = j["offset"].get<std::vector<double>>();
  return col;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
}

void write_factorization(const fs::path& dir, const DataTable& table, const Factorization& fact) {
  fs::create_directories(dir);
  const auto labels = embedded_labels(fact.column_layout);
  std::vector<std::string> x_header;
  for (std::size_t c = 0; c < fact.rank(); ++c) x_header.push_back("x" + std::to_string(c + 1));
  write_csv(dir / "X.csv", x_header, fact.X);
  write_csv(dir / "Y.csv", labels, fact.Y);
  write_csv(dir / "mu.csv", labels, fact.mu.transpose());

  json layout;
  layout["format"] = kFactorizationFormat;
  layout["n_rows"] = fact.X.rows();
  layout["rank"] = fact.rank();
  layout["columns"] = json::array();
  for (const auto& span : fact.column_layout) {
    json c = column_to_json(table.columns.at(span.column));
    c["start"] = span.start;
    c["embed_dim"] = span.dim;
    layout["columns"].push_back(std::move(c));
  }
  write_json(dir / "layout.json", layout);
}

Factorization read_factorization(const fs::path& dir) {
  const json layout = read_json(dir / "layout.json");
  if (layout.value("format", "") != kFactorizationFormat) {
    throw DomainError(dir.string() + ": unsupported factorization format");
  }
  Factorization f;
  std::size_t j = 0;
  for (const auto& c : layout.at("columns")) {
    f.column_layout.push_back({c.at("name").get<std::string>(), j++, c.at("start").get<std::size_t>(),
                               c.at("embed_dim").get<std::size_t>()});
  }
  f.X = read_csv(dir / "X.csv").values;
  f.Y = read_csv(dir / "Y.csv").values;
  f.mu = read_csv(dir / "mu.csv").values.row(0).transpose();
  f.validate(layout.at("n_rows").get<std::size_t>());
  return f;
}

}  // namespace hurdlerank
