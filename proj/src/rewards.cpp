#include "cstm/rewards.hpp"

#include "cstm/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace cstm {

namespace {

void require_finite(const std::vector<double>& v, std::string_view what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw DomainError(fmt::format("{} entry {} is not finite", what, i));
  }
}

}  // namespace

StateRewards::StateRewards(std::vector<double> per_state) {
  require_finite(per_state, "state reward");
  per_cycle_.push_back(std::move(per_state));
}

StateRewards::StateRewards(std::vector<std::vector<double>> per_cycle)
    : per_cycle_(std::move(per_cycle)) {
  if (per_cycle_.empty()) throw StructuralError("cycle-indexed rewards need at least one cycle");
  for (const auto& v : per_cycle_) {
    if (v.size() != per_cycle_.front().size()) {
      throw StructuralError("cycle-indexed rewards have inconsistent state counts");
    }
    require_finite(v, "state reward");
  }
}

const std::vector<double>& StateRewards::at(int cycle) const {
  if (!cycle_indexed()) return per_cycle_.front();
  if (cycle < 0 || static_cast<std::size_t>(cycle) >= per_cycle_.size()) {
    throw StructuralError(fmt::format("no rewards defined for cycle {}", cycle));
  }
  return per_cycle_[static_cast<std::size_t>(cycle)];
}

RewardMatrices build_reward_matrices(const StateSpace& space, const StateRewards& rewards,
                                     std::span<const TransitionIncrement> increments,
                                     int horizon) {
  if (rewards.n_states() != space.size()) {
    throw StructuralError(fmt::format("reward vector has {} entries, state space has {}",
                                      rewards.n_states(), space.size()));
  }
  struct Cell {
    Eigen::Index row, col;
    double delta;
  };
  std::vector<Cell> cells;
  for (const auto& inc : increments) {
    if (!std::isfinite(inc.delta)) throw DomainError("transition increment is not finite");
    const auto j = static_cast<Eigen::Index>(space.index_of(inc.destination));
    for (const auto& o : inc.origins) {
      cells.push_back({static_cast<Eigen::Index>(space.index_of(o)), j, inc.delta});
    }
  }

  const auto n = static_cast<Eigen::Index>(space.size());
  RewardMatrices out;
  out.reserve(static_cast<std::size_t>(horizon) + 1);
  for (int t = 0; t <= horizon; ++t) {
    const auto& r = rewards.at(t);
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = r[static_cast<std::size_t>(j)];
    }
    for (const auto& c : cells) m(c.row, c.col) += c.delta;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<double> discount_vector(double rate, int horizon) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw DomainError(fmt::format("discount rate {} must be nonnegative", rate));
  }
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(horizon) + 1);
  for (int t = 0; t <= horizon; ++t) d.push_back(1.0 / std::pow(1.0 + rate, t));
  return d;
}

HalfCycle::HalfCycle(std::vector<double> weights) : weights_(std::move(weights)) {
  for (double w : weights_) {
    if (!(w > 0.0 && w <= 1.0)) throw DomainError(fmt::format("half-cycle weight {} outside (0, 1]", w));
  }
}

HalfCycle HalfCycle::standard(int horizon) {
  std::vector<double> w(static_cast<std::size_t>(horizon) + 1, 1.0);
  w.front() = 0.5;
  w.back() = 0.5;
  return HalfCycle(std::move(w));
}

HalfCycle HalfCycle::none(int horizon) {
  return HalfCycle(std::vector<double>(static_cast<std::size_t>(horizon) + 1, 1.0));
}

std::vector<double> cycle_rewards_state(const CohortTrace& trace, const StateRewards& rewards) {
  if (rewards.n_states() != trace.n_states()) {
    throw StructuralError(fmt::format("reward vector has {} entries, trace has {} states",
                                      rewards.n_states(), trace.n_states()));
  }
  std::vector<double> y;
  y.reserve(static_cast<std::size_t>(trace.horizon()) + 1);
  for (int t = 0; t <= trace.horizon(); ++t) {
    const auto& r = rewards.at(t);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += trace.at(t, i) * r[i];
    y.push_back(s);
  }
  return y;
}

std::vector<double> cycle_rewards_transition(const TransitionDynamics& dynamics,
                                             const RewardMatrices& rewards) {
  if (rewards.size() != dynamics.slices().size()) {
    throw StructuralError(fmt::format("{} reward matrices for {} dynamics slices", rewards.size(),
                                      dynamics.slices().size()));
  }
  std::vector<double> y;
  y.reserve(rewards.size());
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    const Matrix& a = dynamics.slices()[t];
    if (a.rows() != rewards[t].rows() || a.cols() != rewards[t].cols()) {
      throw StructuralError(fmt::format("reward matrix {} has the wrong shape", t));
    }
    y.push_back(a.cwiseProduct(rewards[t]).colwise().sum().sum());
  }
  return y;
}

double total_discounted(std::span<const double> y, std::span<const double> discount,
                        const HalfCycle& hcc) {
  const auto& w = hcc.weights();
  if (y.size() != discount.size() || y.size() != w.size()) {
    throw StructuralError(fmt::format("length mismatch: {} rewards, {} discount weights, {} hcc weights",
                                      y.size(), discount.size(), w.size()));
  }
  double total = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) total += y[t] * discount[t] * w[t];
  return total;
}

}  // namespace cstm
