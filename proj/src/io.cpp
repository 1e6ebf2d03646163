#include "tailrisk/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tailrisk/config.hpp"

namespace tailrisk {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  for (auto& s : cells) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return cells;
}

}  // namespace

SeriesData parse_series_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("CSV input is empty");
  const auto header = split_csv_line(line);

  std::ptrdiff_t value_col = -1;
  std::ptrdiff_t time_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "value") {
      if (value_col >= 0) throw std::runtime_error("CSV header has two 'value' columns");
      value_col = static_cast<std::ptrdiff_t>(i);
    } else if (header[i] == "timestamp") {
      time_col = static_cast<std::ptrdiff_t>(i);
    }
  }
  if (value_col < 0) {
    throw std::runtime_error("CSV header must name a 'value' column, got '" + line + "'");
  }

  SeriesData data;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("CSV line " + std::to_string(lineno) + ": expected " +
                               std::to_string(header.size()) + " fields");
    }
    const auto& cell = cells[static_cast<std::size_t>(value_col)];
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw std::runtime_error("CSV line " + std::to_string(lineno) + ": '" + cell +
                               "' is not a number");
    }
    data.values.push_back(v);
    if (time_col >= 0) data.timestamps.push_back(cells[static_cast<std::size_t>(time_col)]);
  }
  return data;
}

SeriesData read_series_csv(const std::filesystem::path& path) {
  return parse_series_csv(read_text_file(path));
}

std::string series_to_csv(const std::vector<double>& values) {
  std::string out = "value\n";
  for (double v : values) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::ios_base::failure("write to " + path.string() + " failed");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tailrisk
