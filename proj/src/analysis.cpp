#include "cstm/analysis.hpp"

#include "cstm/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace cstm {

namespace {

std::size_t compact_index(std::size_t expanded, std::size_t first_tunnel, int length) {
  const auto T = static_cast<std::size_t>(length);
  if (expanded < first_tunnel) return expanded;
  if (expanded < first_tunnel + T) return first_tunnel;
  return expanded - (T - 1);
}

StateRewards expand_rewards(const StateRewards& rewards, const ExpandedModel& ex) {
  std::vector<std::vector<double>> out;
  for (const auto& v : rewards.per_cycle()) {
    std::vector<double> e(ex.space.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = v.at(compact_index(i, ex.first_tunnel, ex.length));
    out.push_back(std::move(e));
  }
  if (out.size() == 1) return StateRewards(std::move(out.front()));
  return StateRewards(std::move(out));
}

std::vector<TransitionIncrement> expand_increments(const std::vector<TransitionIncrement>& incs,
                                                   const TunnelSpec& spec) {
  std::vector<TransitionIncrement> out;
  for (const auto& inc : incs) {
    TransitionIncrement e{{}, inc.destination, inc.delta};
    if (e.destination == spec.target_state) e.destination = tunnel_label(spec.target_state, 1);
    for (const auto& o : inc.origins) {
      if (o == spec.target_state) {
        for (int tau = 1; tau <= spec.length(); ++tau) e.origins.push_back(tunnel_label(o, tau));
      } else {
        e.origins.push_back(o);
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<StrategyOutcome> collect(const std::vector<StrategyResult>& rs, bool transition) {
  std::vector<StrategyOutcome> out;
  out.reserve(rs.size());
  for (const auto& r : rs) {
    out.push_back({r.label, transition ? r.cost_transition : r.cost_state,
                   transition ? r.effect_transition : r.effect_state});
  }
  return out;
}

}  // namespace

StrategyModel with_tunnel(const StrategyModel& compact, const TunnelSpec& spec) {
  if (compact.tunnel) throw StructuralError(fmt::format("strategy '{}' already has a tunnel", compact.label));
  auto ex = expand_tunnels(compact.space, compact.model, spec);
  auto init = expand_initial(ex, compact.space, compact.init);
  auto costs = expand_rewards(compact.costs, ex);
  auto utilities = expand_rewards(compact.utilities, ex);
  return StrategyModel{compact.label,
                       ex.space,
                       std::move(init),
                       std::move(ex.model),
                       std::move(costs),
                       std::move(utilities),
                       expand_increments(compact.cost_increments, spec),
                       expand_increments(compact.utility_increments, spec),
                       spec,
                       compact.space};
}

StrategyResult evaluate_strategy(const StrategyModel& s, const AnalysisSettings& settings) {
  const auto trace = simulate_cohort(s.space, s.init, s.model);
  const int n_t = trace.horizon();
  const auto hcc = settings.half_cycle ? HalfCycle::standard(n_t) : HalfCycle::none(n_t);
  const auto dc = discount_vector(settings.cost_discount, n_t);
  const auto de = discount_vector(settings.effect_discount, n_t);

  StrategyResult r{s.label, s.reporting_space(),
                   s.tunnel ? aggregate_trace(trace, *s.compact, *s.tunnel) : trace};
  r.cost_state = total_discounted(cycle_rewards_state(trace, s.costs), dc, hcc);
  r.effect_state = total_discounted(cycle_rewards_state(trace, s.utilities), de, hcc);

  const auto dyn = transition_dynamics(trace, s.model);
  const auto rc = build_reward_matrices(s.space, s.costs, s.cost_increments, n_t);
  const auto ru = build_reward_matrices(s.space, s.utilities, s.utility_increments, n_t);
  r.cost_transition = total_discounted(cycle_rewards_transition(dyn, rc), dc, hcc);
  r.effect_transition = total_discounted(cycle_rewards_transition(dyn, ru), de, hcc);
  for (double v : {r.cost_state, r.effect_state, r.cost_transition, r.effect_transition}) {
    if (!std::isfinite(v)) throw NumericError(fmt::format("strategy '{}': non-finite expected outcome", s.label));
  }
  return r;
}

const StrategyResult& AnalysisReport::strategy(std::string_view label) const {
  auto it = std::find_if(strategies.begin(), strategies.end(),
                         [&](const StrategyResult& r) { return r.label == label; });
  if (it == strategies.end()) throw StructuralError(fmt::format("no strategy '{}'", label));
  return *it;
}

std::vector<StrategyOutcome> AnalysisReport::outcomes_state() const { return collect(strategies, false); }

std::vector<StrategyOutcome> AnalysisReport::outcomes() const { return collect(strategies, true); }

AnalysisReport run_analysis(std::span<const StrategyModel> strategies,
                            const AnalysisSettings& settings) {
  if (strategies.empty()) throw StructuralError("no strategies to analyse");
  AnalysisReport report;
  for (const auto& s : strategies) report.strategies.push_back(evaluate_strategy(s, settings));
  report.cea_state = calculate_icers(report.outcomes_state());
  report.cea = calculate_icers(report.outcomes());
  return report;
}

}  // namespace cstm
