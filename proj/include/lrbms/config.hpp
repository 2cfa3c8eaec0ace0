#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lrbms {

/// Flat `key = value` configuration with `#` comments. Every key must be
/// consumed by the experiment, unknown keys are rejected with their line.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  void set(const std::string& key, const std::string& value);  // overrides, marks as external
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback);
  std::string require_string(const std::string& key);
  long long get_int(const std::string& key, long long fallback);
  double get_double(const std::string& key, double fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback);

  /// Throws config_error naming the first unconsumed key and its line.
  void require_all_consumed() const;

  /// Every key this run resolved, including materialized defaults; sorted.
  const std::map<std::string, std::string>& resolved() const { return resolved_; }

 private:
  struct Entry {
    std::string value;
    int line = 0;
    bool consumed = false;
  };
  std::map<std::string, Entry> entries_;
  std::map<std::string, std::string> resolved_;
  const Entry* find(const std::string& key);
  void note(const std::string& key, const std::string& value);
};

}  // namespace lrbms
