#pragma once

#include "cstm/core.hpp"

#include <span>
#include <string>
#include <vector>

namespace cstm {

// Per-state reward (cost or utility weight), either constant over time or
// given per cycle t = 0..n_t.
class StateRewards {
 public:
  explicit StateRewards(std::vector<double> per_state);
  explicit StateRewards(std::vector<std::vector<double>> per_cycle);

  bool cycle_indexed() const { return per_cycle_.size() > 1; }
  std::size_t n_states() const { return per_cycle_.front().size(); }
  // Rewards in effect at cycle t.
  const std::vector<double>& at(int cycle) const;
  const std::vector<std::vector<double>>& per_cycle() const { return per_cycle_; }

 private:
  std::vector<std::vector<double>> per_cycle_;
};

// One-time reward attached to the transition origin -> destination. Signed:
// costs are positive deltas, disutilities negative.
struct TransitionIncrement {
  std::vector<std::string> origins;
  std::string destination;
  double delta = 0.0;
};

// (n_t + 1) matrices R_t. R_t[i, j] is the reward credited to the flow from i
// into j arriving at cycle t.
using RewardMatrices = std::vector<Matrix>;

// Row-replicates the destination state rewards, then adds every increment at
// its (origin, destination) cells in every slice.
RewardMatrices build_reward_matrices(const StateSpace& space, const StateRewards& rewards,
                                     std::span<const TransitionIncrement> increments, int horizon);

// Element t = (1 + rate)^-t, t = 0..horizon.
std::vector<double> discount_vector(double rate, int horizon);

class HalfCycle {
 public:
  // 0.5 at t = 0 and t = n_t, 1 elsewhere.
  static HalfCycle standard(int horizon);
  // All weights 1.
  static HalfCycle none(int horizon);
  explicit HalfCycle(std::vector<double> weights);

  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
};

// y = M r, or y_t = m_t . r_t for cycle-indexed rewards.
std::vector<double> cycle_rewards_state(const CohortTrace& trace, const StateRewards& rewards);

// y_t = sum_ij A_t[i, j] * R_t[i, j].
std::vector<double> cycle_rewards_transition(const TransitionDynamics& dynamics,
                                             const RewardMatrices& rewards);

// sum_t y_t * d_t * hcc_t
double total_discounted(std::span<const double> y, std::span<const double> discount,
                        const HalfCycle& hcc);

}  // namespace cstm
