#pragma once

#include "cstm/core.hpp"

#include <string>
#include <vector>

namespace cstm {

// Expansion of one state into T tunnel states, each occupied for a single
// cycle, so that the progression probability can depend on time in state.
//
// `exit_probabilities[tau-1]` is the progression probability into
// `progression_state` after tau cycles in the target state, conditional on
// surviving the cycle. All other exits from the target (recovery, death) are
// copied per cycle from the compact model.
struct TunnelSpec {
  std::string target_state;
  std::string progression_state;
  std::vector<double> exit_probabilities;

  int length() const { return static_cast<int>(exit_probabilities.size()); }
};

// lambda * gamma * tau^(gamma - 1) for tau = 1..length. Throws DomainError
// naming tau when an element leaves [0, 1].
std::vector<double> weibull_progression(double scale, double shape, int length);

// Tunnel label for 1-based residence time tau: "<state>_<tau>".
std::string tunnel_label(const std::string& state, int tau);

struct ExpandedModel {
  StateSpace space;
  TransitionModel model;
  std::size_t first_tunnel;  // index of <target>_1 in the expanded space
  int length;
};

// Builds the (n_s + T - 1)-state model. Entry into the target routes to
// tunnel 1, tunnel tau continues to tau+1, and tunnel T loops on itself with
// the tau = T probabilities. Throws ValidationError identifying (tau, row)
// when a continuation probability would be negative.
ExpandedModel expand_tunnels(const StateSpace& space, const TransitionModel& tm,
                             const TunnelSpec& spec);

// Expanded-space initial vector: mass in the target state goes to tunnel 1.
StateVector expand_initial(const ExpandedModel& expanded, const StateSpace& compact,
                           const StateVector& init);

// Sums tunnel columns back into the target state's column.
CohortTrace aggregate_trace(const CohortTrace& expanded_trace, const StateSpace& compact,
                            const TunnelSpec& spec);

}  // namespace cstm
