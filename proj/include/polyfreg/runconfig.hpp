#pragma once

#include <map>
#include <string>
#include <vector>

namespace polyfreg {

// Flat `key = value` configuration with `#` comments. Keys are opaque
// strings (dotted names like `toy.n_max` are just keys). Later assignments
// win, and set() lets callers layer command-line overrides on top.
class RunConfig {
 public:
  static RunConfig parse_file(const std::string& path);
  static RunConfig parse_text(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// `1e-5,1e-7;1e-4,1e-6` -> {{1e-5,1e-7},{1e-4,1e-6}}: semicolons separate
// the per-degree candidate lists, commas the values within one list.
std::vector<std::vector<double>> parse_lambda_grid_spec(
    const std::string& spec);

}  // namespace polyfreg
