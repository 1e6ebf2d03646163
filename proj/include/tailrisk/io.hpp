#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tailrisk {

struct SeriesData {
  std::vector<std::string> timestamps;  // empty for single-column input
  std::vector<double> values;
};

/// Reads a headed CSV with either a `value` column or `timestamp,value`.
/// Other layouts are accepted when exactly one column is named `value`.
/// Throws std::runtime_error with the offending line on malformed input.
SeriesData parse_series_csv(std::string_view text);
SeriesData read_series_csv(const std::filesystem::path& path);

/// One `value` column, 17 significant digits.
std::string series_to_csv(const std::vector<double>& values);

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace tailrisk
