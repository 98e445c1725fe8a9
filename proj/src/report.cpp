#include "cstm/report.hpp"

#include "cstm/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace cstm {

using json = nlohmann::ordered_json;

Table trace_table(const StrategyResult& r) {
  Table t;
  t.header = {"cycle"};
  for (const auto& s : r.space.names()) t.header.push_back(s);
  for (int c = 0; c <= r.trace.horizon(); ++c) {
    std::vector<std::string> row{std::to_string(c)};
    for (std::size_t i = 0; i < r.trace.n_states(); ++i) row.push_back(format_number(r.trace.at(c, i)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table epi_table(const std::vector<std::pair<std::string, std::vector<EpiSeries>>>& per_strategy) {
  Table t;
  t.header = {"strategy", "series", "cycle", "value"};
  for (const auto& [label, series] : per_strategy) {
    for (const auto& s : series) {
      for (std::size_t c = 0; c < s.values.size(); ++c) {
        t.rows.push_back({label, s.label, std::to_string(c), format_optional(s.values[c])});
      }
    }
  }
  return t;
}

Table totals_table(const AnalysisReport& report) {
  Table t;
  t.header = {"strategy", "cost_state", "effect_state", "cost", "effect"};
  for (const auto& r : report.strategies) {
    t.rows.push_back({r.label, format_number(r.cost_state), format_number(r.effect_state),
                      format_number(r.cost_transition), format_number(r.effect_transition)});
  }
  return t;
}

Table cea_table(const CeaTable& cea) {
  Table t;
  t.header = {"strategy", "cost", "effect", "incremental_cost", "incremental_effect", "icer", "status"};
  for (const auto& r : cea.rows) {
    t.rows.push_back({r.label, format_number(r.cost), format_number(r.effect),
                      format_optional(r.incremental_cost), format_optional(r.incremental_effect),
                      format_optional(r.icer), to_string(r.status)});
  }
  return t;
}

Table psa_samples_table(const PsaSampleSet& samples) {
  Table t;
  t.header = {"sample"};
  for (const auto& n : samples.names) t.header.push_back(n);
  for (std::size_t i = 0; i < samples.n_sim(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    for (double v : samples.rows[i]) row.push_back(format_number(v));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table psa_outcomes_table(const PsaOutcomes& o) {
  Table t;
  t.header = {"sample", "strategy", "cost", "effect"};
  for (std::size_t i = 0; i < o.n_sim(); ++i) {
    for (std::size_t s = 0; s < o.strategies.size(); ++s) {
      t.rows.push_back({std::to_string(i), o.strategies[s], format_number(o.cost[i][s]),
                        format_number(o.effect[i][s])});
    }
  }
  return t;
}

Table ceac_table(const AcceptabilityCurves& c, const std::vector<std::string>& strategies) {
  Table t;
  t.header = {"wtp", "strategy", "probability", "on_frontier"};
  for (std::size_t w = 0; w < c.wtp.size(); ++w) {
    for (std::size_t s = 0; s < strategies.size(); ++s) {
      t.rows.push_back({format_number(c.wtp[w]), strategies[s], format_number(c.probability[w][s]),
                        c.frontier[w] == s ? "1" : "0"});
    }
  }
  return t;
}

Table elc_table(const ExpectedLoss& l, const std::vector<std::string>& strategies) {
  Table t;
  t.header = {"wtp", "strategy", "expected_loss", "evpi"};
  for (std::size_t w = 0; w < l.wtp.size(); ++w) {
    for (std::size_t s = 0; s < strategies.size(); ++s) {
      t.rows.push_back({format_number(l.wtp[w]), strategies[s], format_number(l.loss[w][s]),
                        format_number(l.evpi[w])});
    }
  }
  return t;
}

std::vector<StrategyOutcome> read_totals(const Table& table) {
  const auto si = table.column("strategy");
  const auto ci = table.column("cost");
  const auto ei = table.column("effect");
  std::vector<StrategyOutcome> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    out.push_back({row[si], parse_number(row[ci], "totals", r + 2), parse_number(row[ei], "totals", r + 2)});
  }
  return out;
}

json table_to_json(const Table& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    json row = json::array();
    for (const auto& cell : r) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell == "NA") {
        row.push_back(nullptr);
      } else if (ec == std::errc() && p == cell.data() + cell.size()) {
        row.push_back(v);
      } else {
        row.push_back(cell);
      }
    }
    rows.push_back(std::move(row));
  }
  return json{{"columns", table.header}, {"rows", std::move(rows)}};
}

Table table_from_json(const json& doc) {
  try {
    Table t;
    t.header = doc.at("columns").get<std::vector<std::string>>();
    for (const auto& r : doc.at("rows")) {
      if (r.size() != t.header.size()) throw ConfigError("JSON table row has the wrong number of cells");
      std::vector<std::string> row;
      for (const auto& cell : r) {
        if (cell.is_null()) row.emplace_back("NA");
        else if (cell.is_number()) row.push_back(format_number(cell.get<double>()));
        else row.push_back(cell.get<std::string>());
      }
      t.rows.push_back(std::move(row));
    }
    return t;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("JSON table: {}", e.what()));
  }
}

std::string write_table(const std::filesystem::path& dir, const std::string& stem, const Table& table,
                        TableFormat format) {
  if (format == TableFormat::csv) {
    const auto name = stem + ".csv";
    write_csv(dir / name, table);
    return name;
  }
  const auto name = stem + ".json";
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", (dir / name).string()));
  out << table_to_json(table).dump(2) << '\n';
  return name;
}

std::string format_dollars(double v) {
  const double r = std::round(v);
  std::string digits = fmt::format("{:.0f}", std::abs(r));
  std::string grouped;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) grouped += ',';
    grouped += digits[i];
  }
  return (r < 0 ? "-$" : "$") + grouped;
}

std::string format_fixed(double v, int decimals) {
  auto s = fmt::format("{:.{}f}", v, decimals);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

std::string render_cea(const CeaTable& cea) {
  std::string out = fmt::format("{:<10} {:>12} {:>9} {:>12} {:>9} {:>12} {:>6}\n", "Strategy", "Cost",
                                "QALYs", "Inc. cost", "Inc. QALY", "ICER", "Status");
  for (const auto& r : cea.rows) {
    out += fmt::format("{:<10} {:>12} {:>9} {:>12} {:>9} {:>12} {:>6}\n", r.label, format_dollars(r.cost),
                       format_fixed(r.effect, 3),
                       r.incremental_cost ? format_dollars(*r.incremental_cost) : "",
                       r.incremental_effect ? format_fixed(*r.incremental_effect, 3) : "",
                       r.icer ? format_dollars(*r.icer) : "", to_string(r.status));
  }
  return out;
}

std::string render_totals(const AnalysisReport& report) {
  std::string out = fmt::format("{:<10} {:>12} {:>9} {:>12} {:>9}\n", "Strategy", "Cost*", "QALYs*",
                                "Cost", "QALYs");
  for (const auto& r : report.strategies) {
    out += fmt::format("{:<10} {:>12} {:>9} {:>12} {:>9}\n", r.label, format_dollars(r.cost_state),
                       format_fixed(r.effect_state, 3), format_dollars(r.cost_transition),
                       format_fixed(r.effect_transition, 3));
  }
  out += "* state rewards only\n";
  return out;
}

std::string render_trace(const StrategyResult& r, int max_cycles) {
  std::string out = fmt::format("{:>5}", "cycle");
  for (const auto& s : r.space.names()) out += fmt::format(" {:>8}", s);
  out += '\n';
  const int last = std::min(r.trace.horizon(), max_cycles);
  for (int c = 0; c <= last; ++c) {
    out += fmt::format("{:>5}", c);
    for (std::size_t i = 0; i < r.trace.n_states(); ++i) out += fmt::format(" {:>8}", format_fixed(r.trace.at(c, i), 3));
    out += '\n';
  }
  return out;
}

}  // namespace cstm
