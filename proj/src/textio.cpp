#include "polyfreg/textio.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "polyfreg/errors.hpp"

namespace polyfreg {

namespace {

std::string format_with(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return std::string(buf);
}

}  // namespace

std::string format_full(double v) { return format_with("%.17g", v); }

std::string format_short(double v) { return format_with("%.9g", v); }

std::string format_label(double v) { return format_with("%g", v); }

std::vector<std::string> split_csv(const std::string& line) {
  return split_on(line, ',');
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& text, const std::string& context) {
  const std::string t = trim(text);
  if (t.empty()) throw DataFormatError("empty number in " + context);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end == nullptr || *end != '\0') {
    throw DataFormatError("bad number '" + text + "' in " + context);
  }
  return v;
}

long parse_long(const std::string& text, const std::string& context) {
  const std::string t = trim(text);
  if (t.empty()) throw DataFormatError("empty integer in " + context);
  char* end = nullptr;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (end == nullptr || *end != '\0') {
    throw DataFormatError("bad integer '" + text + "' in " + context);
  }
  return v;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataFormatError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw DataFormatError("write failed: " + path);
}

}  // namespace polyfreg
