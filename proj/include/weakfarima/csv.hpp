#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace weakfarima::csv {

/// Comma-separated table with a mandatory header row. Fields are not quoted
/// on output; surrounding double quotes are stripped on input.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header; throws std::invalid_argument if absent.
  [[nodiscard]] std::size_t column_index(const std::string& name) const;
};

Table parse(const std::string& text);
Table read(const std::filesystem::path& path);
std::string format(const Table& table);
void write(const std::filesystem::path& path, const Table& table);

/// Parses a numeric field; empty, "NA", "NaN", "null" and unparsable text
/// give NaN.
double to_number(const std::string& field);

/// Locale-independent shortest round-trip formatting of a double.
std::string num(double v);

}  // namespace weakfarima::csv
