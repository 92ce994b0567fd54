#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace routine {

/// Flat `section.key -> raw value` map read from a TOML-style file:
///
///     # comment
///     [section]
///     key = "text" | 12 | 0.5 | true | ["a", "b"] | [1, 2]
///
/// Values keep their source text; the typed getters parse on demand and
/// throw ConfigError naming the key.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<config>");
  static KeyValueConfig load(const std::filesystem::path& file);

  /// `key=value` override, value in the same syntax (bare strings allowed).
  void set_override(const std::string& assignment);
  void set(const std::string& key, const std::string& raw);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& raw() const noexcept { return values_; }

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

 private:
  const std::string& lookup(const std::string& key) const;
  std::map<std::string, std::string> values_;
};

}  // namespace routine
