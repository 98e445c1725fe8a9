#include "cstm/table_io.hpp"

#include "cstm/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace cstm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

char sniff_delimiter(std::string_view header) {
  for (char c : {'\t', ',', ';'}) {
    if (header.find(c) != std::string_view::npos) return c;
  }
  return ',';
}

std::vector<std::string> split(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    auto cell = trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') {
      cell = cell.substr(1, cell.size() - 2);
    }
    out.emplace_back(cell);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ConfigError(fmt::format("table has no column '{}'", name));
  return static_cast<std::size_t>(it - header.begin());
}

Table read_delimited(std::istream& in, std::string_view source) {
  Table table;
  std::string line;
  char delim = ',';
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (!have_header) {
      delim = sniff_delimiter(view);
      table.header = split(view, delim);
      have_header = true;
      continue;
    }
    auto cells = split(view, delim);
    if (cells.size() != table.header.size()) {
      throw ConfigError(fmt::format("{}:{}: expected {} fields, found {}", source, line_no,
                                    table.header.size(), cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw ConfigError(fmt::format("{}: no header row", source));
  return table;
}

Table read_delimited(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  return read_delimited(in, path.string());
}

void write_csv(std::ostream& out, const Table& table) {
  auto write_row = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  write_csv(out, table);
}

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  return fmt::format("{:.10g}", v);
}

std::string format_exact(double v) {
  if (v == 0.0) return "0";
  return fmt::format("{}", v);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string("NA");
}

double parse_number(std::string_view text, std::string_view source, std::size_t line) {
  auto t = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(fmt::format("{}:{}: '{}' is not a number", source, line, t));
  }
  return value;
}

std::optional<double> parse_optional(std::string_view text, std::string_view source,
                                     std::size_t line) {
  auto t = trim(text);
  if (t.empty() || t == "NA") return std::nullopt;
  return parse_number(t, source, line);
}

}  // namespace cstm
