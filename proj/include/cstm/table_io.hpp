#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cstm {

// A header plus rows of string cells. Used for every delimited file the
// engine reads or writes.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  // throws ConfigError if absent
};

// Reads comma-, tab- or semicolon-separated text (delimiter sniffed from the
// header line). Blank lines and lines starting with '#' are skipped.
Table read_delimited(std::istream& in, std::string_view source = "<stream>");
Table read_delimited(const std::filesystem::path& path);

void write_csv(std::ostream& out, const Table& table);
void write_csv(const std::filesystem::path& path, const Table& table);

// Machine-table number format: 10 significant digits, shortest form.
std::string format_number(double v);
// Shortest text that parses back to the same double.
std::string format_exact(double v);
// Missing values are written as "NA".
std::string format_optional(const std::optional<double>& v);

double parse_number(std::string_view text, std::string_view source, std::size_t line);
std::optional<double> parse_optional(std::string_view text, std::string_view source,
                                     std::size_t line);

}  // namespace cstm
