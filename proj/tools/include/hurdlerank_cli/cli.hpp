#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hurdlerank/table.hpp"

namespace hurdlerank::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Runs the command line `args` (args[0] is the program name) and returns the
/// process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Reads the CSV at `input` and builds a table whose column order and models
/// follow `schema` ({"columns": [...]}). Names must match the CSV header one
/// to one.
DataTable load_table(const std::filesystem::path& input, const nlohmann::json& schema);

/// Columns flagged with "mar_offset_refresh": true in the schema.
std::vector<std::string> mar_refresh_columns(const nlohmann::json& schema);

/// Writes manifest.json listing every other file under `dir` with its size
/// and FNV-1a digest, plus `config` and its hash.
void write_manifest(const std::filesystem::path& dir, std::string_view command,
                    const nlohmann::json& config, const nlohmann::json& extra = {});

}  // namespace hurdlerank::cli
