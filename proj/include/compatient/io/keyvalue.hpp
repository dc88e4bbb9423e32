#pragma once

#include <string>
#include <vector>

namespace compatient::io {

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

/// Parses `key = value` lines. Blank lines and lines starting with '#' are
/// skipped; keys must be unique. Throws ConfigError naming the line.
std::vector<KeyValue> parse_key_values(const std::string& text);

std::string read_file(const std::string& path);

/// Strict numeric parse of the whole string; ConfigError(field, ..., line) otherwise.
double parse_number(const std::string& text, const std::string& field, int line = 0);
bool parse_bool(const std::string& text, const std::string& field, int line = 0);

/// Shortest decimal text that reads back to exactly `v`.
std::string format_number(double v);

}  // namespace compatient::io
