#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cstm {

struct StrategyOutcome {
  std::string label;
  double cost = 0.0;
  double effect = 0.0;
};

enum class Dominance { non_dominated, dominated, extendedly_dominated };

// "ND", "D", "ED"
const char* to_string(Dominance d);

struct CeaRow {
  std::string label;
  double cost = 0.0;
  double effect = 0.0;
  std::optional<double> incremental_cost;
  std::optional<double> incremental_effect;
  std::optional<double> icer;
  Dominance status = Dominance::non_dominated;
};

// Frontier strategies first (ascending cost), then strongly and extendedly
// dominated strategies in ascending cost order.
struct CeaTable {
  std::vector<CeaRow> rows;

  const CeaRow& row(std::string_view label) const;
  std::vector<std::string> frontier() const;
};

// Strong dominance, then iterated extended dominance, then ICERs between
// adjacent frontier strategies. Exact (cost, effect) duplicates keep the
// lexicographically first label. A strategy is extendedly dominated only when
// its ICER strictly exceeds the next one, so collinear strategies stay ND.
CeaTable calculate_icers(std::span<const StrategyOutcome> outcomes);

double net_monetary_benefit(const StrategyOutcome& outcome, double wtp);

}  // namespace cstm
