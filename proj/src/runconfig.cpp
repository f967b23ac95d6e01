#include "polyfreg/runconfig.hpp"

#include "polyfreg/errors.hpp"
#include "polyfreg/textio.hpp"

namespace polyfreg {

namespace {

void absorb_line(std::map<std::string, std::string>& values,
                 std::string line) {
  const size_t hash = line.find('#');
  if (hash != std::string::npos) line.erase(hash);
  line = trim(line);
  if (line.empty()) return;
  const size_t eq = line.find('=');
  if (eq == std::string::npos) {
    throw DataFormatError("config line without '=': " + line);
  }
  const std::string key = trim(line.substr(0, eq));
  if (key.empty()) {
    throw DataFormatError("config line with empty key: " + line);
  }
  values[key] = trim(line.substr(eq + 1));
}

}  // namespace

RunConfig RunConfig::parse_file(const std::string& path) {
  RunConfig config;
  for (const std::string& raw : read_lines(path)) {
    absorb_line(config.values_, raw);
  }
  return config;
}

RunConfig RunConfig::parse_text(const std::string& text) {
  RunConfig config;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    absorb_line(config.values_, text.substr(start, end - start));
    if (end == text.size()) break;
    start = end + 1;
  }
  return config;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  values_[trim(key)] = trim(value);
}

bool RunConfig::has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  return parse_double(it->second, "config key '" + key + "'");
}

long RunConfig::get_long(const std::string& key, long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  return parse_long(it->second, "config key '" + key + "'");
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw DataFormatError("config key '" + key + "' is not a boolean: " + v);
}

std::vector<std::vector<double>> parse_lambda_grid_spec(
    const std::string& spec) {
  std::vector<std::vector<double>> out;
  for (const std::string& degree_part : split_on(spec, ';')) {
    std::vector<double> list;
    for (const std::string& item : split_on(degree_part, ',')) {
      const std::string token = trim(item);
      if (token.empty()) {
        throw DataFormatError("empty value in lambda grid spec: " + spec);
      }
      list.push_back(parse_double(token, "lambda grid spec"));
    }
    if (list.empty()) {
      throw DataFormatError("empty degree list in lambda grid spec: " + spec);
    }
    out.push_back(std::move(list));
  }
  if (out.empty()) {
    throw DataFormatError("empty lambda grid spec");
  }
  return out;
}

}  // namespace polyfreg
