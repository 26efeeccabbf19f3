#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace volregime::cli {

using json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; identical across runs and thread counts.
std::string format_double(double value);

/// `dir/report.json` + "_equity.csv" -> `dir/report_equity.csv`.
std::filesystem::path sibling(const std::filesystem::path& primary, const std::string& suffix);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& value);

/// FNV-1a over the file bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

/// Rows of doubles joined by commas under a header line.
std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns);

}  // namespace volregime::cli
