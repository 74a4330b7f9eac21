#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ccmvlc {

/// Flat `key = value` settings; `#` starts a comment, blank lines are ignored
/// and a repeated key keeps its last value.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma- or whitespace-separated reals.
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback = {}) const;

 private:
  std::map<std::string, std::string> values_;
};

std::string trim(const std::string& s);
double parse_double(const std::string& text, const std::string& what);
/// Accepts `inf` for the noiseless sentinel.
std::vector<double> parse_double_list(const std::string& text, const std::string& what);

}  // namespace ccmvlc
