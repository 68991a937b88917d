#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hurdlerank/solver.hpp"

namespace hurdlerank {

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;  // empty field -> NaN
};

/// Comma-separated, header row required, empty field = missing.
CsvTable read_csv(const std::filesystem::path& path);

/// Shortest round-trip text for a double; NaN becomes the empty string.
std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Matrix& values);

nlohmann::json column_to_json(const ColumnSpec& column);
/// Throws DomainError on unknown keys or values.
ColumnSpec column_from_json(const nlohmann::json& j);

/// X.csv, Y.csv, mu.csv and layout.json under `dir`.
void write_factorization(const std::filesystem::path& dir, const DataTable& table,
                         const Factorization& fact);

Factorization read_factorization(const std::filesystem::path& dir);

/// Writes `j` with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace hurdlerank
