#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tailrisk {

/// Malformed or inconsistent configuration. key() names the offending entry
/// when there is one.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : "config key '" + key + "': " + what),
        key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Parses either a JSON object or plain `key = value` lines (with `#`
/// comments) into a JSON object. Plain-text values stay strings; the typed
/// getters below accept both representations.
nlohmann::json parse_config_text(std::string_view text);
nlohmann::json load_config_file(const std::filesystem::path& path);

/// Throws ConfigError naming the first key not in `allowed`.
void reject_unknown_keys(const nlohmann::json& cfg, const std::vector<std::string_view>& allowed);

std::optional<double> get_double(const nlohmann::json& cfg, const std::string& key);
std::optional<std::uint64_t> get_count(const nlohmann::json& cfg, const std::string& key);
std::optional<std::string> get_string(const nlohmann::json& cfg, const std::string& key);
std::optional<std::vector<double>> get_double_list(const nlohmann::json& cfg,
                                                   const std::string& key);
std::optional<std::vector<std::uint64_t>> get_count_list(const nlohmann::json& cfg,
                                                         const std::string& key);
std::optional<std::vector<std::string>> get_string_list(const nlohmann::json& cfg,
                                                        const std::string& key);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

}  // namespace tailrisk
