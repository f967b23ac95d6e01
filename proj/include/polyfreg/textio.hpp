#pragma once

#include <string>
#include <vector>

namespace polyfreg {

// Formats a double with 17 significant digits, enough for a bit-exact
// round-trip through decimal text.
std::string format_full(double v);

// Shorter form for human-facing tables (9 significant digits).
std::string format_short(double v);

// Compact form for parameter labels (6 significant digits, like "%g").
std::string format_label(double v);

// Splits one CSV record on commas. No quoting support: none of the formats
// this tool reads or writes ever quotes fields.
std::vector<std::string> split_csv(const std::string& line);

// Strips surrounding ASCII whitespace.
std::string trim(const std::string& s);

// Strict numeric parsing; the context string is embedded in the error
// message on failure.
double parse_double(const std::string& text, const std::string& context);
long parse_long(const std::string& text, const std::string& context);

// Reads a whole text file into lines, tolerating CRLF and a missing final
// newline. Throws DataFormatError if the file cannot be opened.
std::vector<std::string> read_lines(const std::string& path);

// Writes content to path, throwing DataFormatError on I/O failure.
void write_file(const std::string& path, const std::string& content);

// Splits on an arbitrary separator character (used for per-degree lambda
// lists separated by ';').
std::vector<std::string> split_on(const std::string& s, char sep);

}  // namespace polyfreg
