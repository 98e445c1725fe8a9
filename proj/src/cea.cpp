#include "cstm/cea.hpp"

#include "cstm/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace cstm {

const char* to_string(Dominance d) {
  switch (d) {
    case Dominance::non_dominated: return "ND";
    case Dominance::dominated: return "D";
    case Dominance::extendedly_dominated: return "ED";
  }
  return "?";
}

const CeaRow& CeaTable::row(std::string_view label) const {
  auto it = std::find_if(rows.begin(), rows.end(), [&](const CeaRow& r) { return r.label == label; });
  if (it == rows.end()) throw StructuralError(fmt::format("no strategy '{}' in CEA table", label));
  return *it;
}

std::vector<std::string> CeaTable::frontier() const {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    if (r.status == Dominance::non_dominated) out.push_back(r.label);
  }
  return out;
}

CeaTable calculate_icers(std::span<const StrategyOutcome> outcomes) {
  if (outcomes.empty()) throw StructuralError("CEA needs at least one strategy");
  std::set<std::string> labels;
  for (const auto& o : outcomes) {
    if (!labels.insert(o.label).second) {
      throw StructuralError(fmt::format("duplicate strategy label '{}'", o.label));
    }
    if (!std::isfinite(o.cost) || !std::isfinite(o.effect)) {
      throw DomainError(fmt::format("strategy '{}' has non-finite cost or effect", o.label));
    }
  }

  std::vector<std::size_t> order(outcomes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = outcomes[a];
    const auto& y = outcomes[b];
    if (x.cost != y.cost) return x.cost < y.cost;
    if (x.effect != y.effect) return x.effect > y.effect;
    return x.label < y.label;
  });

  std::vector<Dominance> status(outcomes.size(), Dominance::non_dominated);
  std::vector<std::size_t> frontier;
  double best_effect = -std::numeric_limits<double>::infinity();
  for (auto i : order) {
    // Everything earlier costs no more, so a strategy is strongly dominated
    // as soon as some earlier one is at least as effective.
    if (outcomes[i].effect <= best_effect) {
      status[i] = Dominance::dominated;
    } else {
      frontier.push_back(i);
      best_effect = outcomes[i].effect;
    }
  }

  auto icer = [&](std::size_t from, std::size_t to) {
    return (outcomes[to].cost - outcomes[from].cost) / (outcomes[to].effect - outcomes[from].effect);
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 1; k + 1 < frontier.size(); ++k) {
      if (icer(frontier[k - 1], frontier[k]) > icer(frontier[k], frontier[k + 1])) {
        status[frontier[k]] = Dominance::extendedly_dominated;
        frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(k));
        changed = true;
        break;
      }
    }
  }

  CeaTable table;
  for (std::size_t k = 0; k < frontier.size(); ++k) {
    const auto& o = outcomes[frontier[k]];
    CeaRow row{o.label, o.cost, o.effect, std::nullopt, std::nullopt, std::nullopt,
               Dominance::non_dominated};
    if (k > 0) {
      const auto& prev = outcomes[frontier[k - 1]];
      row.incremental_cost = o.cost - prev.cost;
      row.incremental_effect = o.effect - prev.effect;
      row.icer = *row.incremental_cost / *row.incremental_effect;
    }
    table.rows.push_back(std::move(row));
  }
  for (auto i : order) {
    if (status[i] == Dominance::non_dominated) continue;
    const auto& o = outcomes[i];
    table.rows.push_back({o.label, o.cost, o.effect, std::nullopt, std::nullopt, std::nullopt, status[i]});
  }
  return table;
}

double net_monetary_benefit(const StrategyOutcome& outcome, double wtp) {
  if (!(wtp >= 0.0)) throw DomainError(fmt::format("willingness to pay {} must be nonnegative", wtp));
  return outcome.effect * wtp - outcome.cost;
}

}  // namespace cstm
