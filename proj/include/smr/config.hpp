#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "smr/errors.hpp"
#include "smr/io.hpp"

namespace smr {

/// Flat key=value configuration. Later `set` calls win, so load the file
/// first and apply command-line overrides after. The canonical form (sorted
/// keys, one `key=value` per line) is what gets hashed into outputs.
class ConfigMap {
 public:
  ConfigMap() = default;

  static ConfigMap from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ConfigMap cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string trimmed = trim(line);
      if (trimmed.empty() || trimmed[0] == '#') continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
      cfg.kv_[key] = value;
    }
    return cfg;
  }

  /// Parse a single "key=value" token (command-line override form).
  void set_pair(const std::string& pair) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override must look like key=value: " + pair);
    set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
  }

  void set(const std::string& key, const std::string& value) {
    if (key.empty()) throw ConfigError("config key must not be empty");
    kv_[key] = value;
  }
  void set_double(const std::string& key, double v) { kv_[key] = format_double(v); }
  void set_u64(const std::string& key, std::uint64_t v) { kv_[key] = format_u64(v); }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    return parse_double(key, it->second);
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::uint64_t v = 0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError("config key '" + key + "': not an unsigned integer: " + s);
    return v;
  }

  bool get_flag(const std::string& key, bool fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const auto& s = it->second;
    if (s == "1" || s == "true" || s == "on" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "off" || s == "no") return false;
    throw ConfigError("config key '" + key + "': not a boolean: " + s);
  }

  const std::map<std::string, std::string>& entries() const { return kv_; }

  /// Sorted key=value lines; std::map keeps keys ordered.
  std::string canonical() const {
    std::ostringstream out;
    for (const auto& [k, v] : kv_) out << k << '=' << v << '\n';
    return out.str();
  }

  std::string hash() const { return hex_u64(fnv1a_64(canonical())); }

 private:
  static std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  }

  static double parse_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError("config key '" + key + "': not a number: " + s);
    return v;
  }

  std::map<std::string, std::string> kv_;
};

}  // namespace smr
