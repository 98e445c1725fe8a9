#pragma once

#include "cstm/cea.hpp"
#include "cstm/core.hpp"
#include "cstm/rewards.hpp"
#include "cstm/tunnels.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cstm {

// Everything needed to simulate and value one strategy.
struct StrategyModel {
  std::string label;
  StateSpace space;
  StateVector init;
  TransitionModel model;
  StateRewards costs;
  StateRewards utilities;
  std::vector<TransitionIncrement> cost_increments;
  std::vector<TransitionIncrement> utility_increments;
  // Set when `space` is a tunnel expansion of `compact`.
  std::optional<TunnelSpec> tunnel;
  std::optional<StateSpace> compact;

  const StateSpace& reporting_space() const { return compact ? *compact : space; }
};

// Expands model, initial vector, state rewards and increments. Tunnel states
// inherit the target's rewards; increments into the target apply on entry to
// tunnel 1 and increments out of it apply from every tunnel.
StrategyModel with_tunnel(const StrategyModel& compact, const TunnelSpec& spec);

struct AnalysisSettings {
  double cost_discount = 0.03;
  double effect_discount = 0.03;
  bool half_cycle = true;
};

struct StrategyResult {
  std::string label;
  StateSpace space;    // reporting (compact) space
  CohortTrace trace;   // over `space`
  double cost_state = 0.0;
  double effect_state = 0.0;
  double cost_transition = 0.0;
  double effect_transition = 0.0;
};

StrategyResult evaluate_strategy(const StrategyModel& strategy, const AnalysisSettings& settings);

struct AnalysisReport {
  std::vector<StrategyResult> strategies;
  CeaTable cea_state;       // state rewards only
  CeaTable cea;             // state and transition rewards

  const StrategyResult& strategy(std::string_view label) const;
  std::vector<StrategyOutcome> outcomes_state() const;
  std::vector<StrategyOutcome> outcomes() const;
};

AnalysisReport run_analysis(std::span<const StrategyModel> strategies,
                            const AnalysisSettings& settings);

}  // namespace cstm
