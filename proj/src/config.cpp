#include "tailrisk/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tailrisk {
namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used == t.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(key, "expected a number, got '" + t + "'");
}

std::uint64_t parse_count(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec == std::errc() && ptr == t.data() + t.size() && !t.empty()) return v;
  // Accept integral floating notation such as 1e6.
  const double d = parse_double(key, t);
  if (d >= 0 && std::floor(d) == d && d < 1.8e19) return static_cast<std::uint64_t>(d);
  throw ConfigError(key, "expected a non-negative integer, got '" + t + "'");
}

double json_double(const std::string& key, const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_double(key, v.get<std::string>());
  throw ConfigError(key, "expected a number");
}

std::uint64_t json_count(const std::string& key, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const auto i = v.get<std::int64_t>();
    if (i < 0) throw ConfigError(key, "expected a non-negative integer");
    return static_cast<std::uint64_t>(i);
  }
  if (v.is_number_float()) return parse_count(key, format_double(v.get<double>()));
  if (v.is_string()) return parse_count(key, v.get<std::string>());
  throw ConfigError(key, "expected a non-negative integer");
}

}  // namespace

json parse_config_text(std::string_view text) {
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') {
    try {
      json j = json::parse(t);
      if (!j.is_object()) throw ConfigError("", "JSON config must be an object");
      return j;
    } catch (const json::parse_error& e) {
      throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
  }
  json out = json::object();
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string l = trim(line);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(l.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");
    }
    if (out.contains(key)) throw ConfigError(key, "duplicate key");
    out[key] = trim(l.substr(eq + 1));
  }
  return out;
}

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void reject_unknown_keys(const json& cfg, const std::vector<std::string_view>& allowed) {
  for (const auto& [key, _] : cfg.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(key, "unknown key");
    }
  }
}

std::optional<double> get_double(const json& cfg, const std::string& key) {
  if (!cfg.contains(key) || cfg[key].is_null()) return std::nullopt;
  return json_double(key, cfg[key]);
}

std::optional<std::uint64_t> get_count(const json& cfg, const std::string& key) {
  if (!cfg.contains(key) || cfg[key].is_null()) return std::nullopt;
  return json_count(key, cfg[key]);
}

std::optional<std::string> get_string(const json& cfg, const std::string& key) {
  if (!cfg.contains(key) || cfg[key].is_null()) return std::nullopt;
  const auto& v = cfg[key];
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw ConfigError(key, "expected a string");
}

std::optional<std::vector<double>> get_double_list(const json& cfg, const std::string& key) {
  if (!cfg.contains(key) || cfg[key].is_null()) return std::nullopt;
  const auto& v = cfg[key];
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(json_double(key, e));
  } else if (v.is_string()) {
    for (const auto& s : split_list(v.get<std::string>())) out.push_back(parse_double(key, s));
  } else {
    out.push_back(json_double(key, v));
  }
  return out;
}

std::optional<std::vector<std::uint64_t>> get_count_list(const json& cfg,
                                                         const std::string& key) {
  if (!cfg.contains(key) || cfg[key].is_null()) return std::nullopt;
  const auto& v = cfg[key];
  std::vector<std::uint64_t> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(json_count(key, e));
    return out;
  }
  if (!v.is_string()) {
    out.push_back(json_count(key, v));
    return out;
  }
  for (const auto& item : split_list(v.get<std::string>())) {
    // first:last:step range, inclusive of last when it lies on the grid
    if (auto c1 = item.find(':'); c1 != std::string::npos) {
      const auto c2 = item.find(':', c1 + 1);
      const auto first = parse_count(key, item.substr(0, c1));
      const auto last = parse_count(key, item.substr(c1 + 1, c2 == std::string::npos
                                                                  ? std::string::npos
                                                                  : c2 - c1 - 1));
      const auto step = c2 == std::string::npos ? 1 : parse_count(key, item.substr(c2 + 1));
      if (step == 0) throw ConfigError(key, "range step must be positive");
      for (auto k = first; k <= last; k += step) out.push_back(k);
    } else {
      out.push_back(parse_count(key, item));
    }
  }
  return out;
}

std::optional<std::vector<std::string>> get_string_list(const json& cfg,
                                                        const std::string& key) {
  if (!cfg.contains(key) || cfg[key].is_null()) return std::nullopt;
  const auto& v = cfg[key];
  std::vector<std::string> out;
  if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError(key, "expected a list of strings");
      out.push_back(e.get<std::string>());
    }
  } else if (v.is_string()) {
    out = split_list(v.get<std::string>());
  } else {
    throw ConfigError(key, "expected a list of strings");
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace tailrisk
