#include "cstm/tunnels.hpp"

#include "cstm/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace cstm {

std::vector<double> weibull_progression(double scale, double shape, int length) {
  if (!(scale > 0.0) || !(shape > 0.0)) {
    throw DomainError(fmt::format("Weibull scale ({}) and shape ({}) must be positive", scale, shape));
  }
  if (length < 1) throw DomainError(fmt::format("tunnel length must be >= 1, got {}", length));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(length));
  for (int tau = 1; tau <= length; ++tau) {
    const double p = scale * shape * std::pow(static_cast<double>(tau), shape - 1.0);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DomainError(fmt::format("Weibull progression at tau = {} is {} (outside [0, 1])", tau, p));
    }
    out.push_back(p);
  }
  return out;
}

std::string tunnel_label(const std::string& state, int tau) {
  return fmt::format("{}_{}", state, tau);
}

namespace {

// Compact index -> expanded index for every state except the target.
std::size_t expanded_index(std::size_t compact, std::size_t target, int length) {
  return compact < target ? compact : compact + static_cast<std::size_t>(length) - 1;
}

}  // namespace

ExpandedModel expand_tunnels(const StateSpace& space, const TransitionModel& tm,
                             const TunnelSpec& spec) {
  const auto k = space.index_of(spec.target_state);
  const auto g = space.index_of(spec.progression_state);
  const int T = spec.length();
  if (T < 1) throw DomainError("tunnel spec needs at least one exit probability");
  if (k == g) throw StructuralError("tunnel progression state must differ from the target state");
  if (space.is_absorbing(k)) {
    throw StructuralError(fmt::format("cannot expand absorbing state '{}'", spec.target_state));
  }
  if (space.is_absorbing(g)) {
    throw StructuralError(fmt::format("tunnel progression state '{}' is absorbing", spec.progression_state));
  }
  for (int tau = 1; tau <= T; ++tau) {
    const double e = spec.exit_probabilities[static_cast<std::size_t>(tau - 1)];
    if (!(e >= 0.0 && e <= 1.0)) {
      throw DomainError(fmt::format("tunnel exit probability at tau = {} is {}", tau, e));
    }
  }
  if (tm.n_states() != space.size()) {
    throw StructuralError(fmt::format("model has {} states but the state space has {}",
                                      tm.n_states(), space.size()));
  }

  const std::size_t n = space.size();
  const std::size_t n_exp = n + static_cast<std::size_t>(T) - 1;
  std::vector<std::string> names;
  names.reserve(n_exp);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == k) {
      for (int tau = 1; tau <= T; ++tau) names.push_back(tunnel_label(spec.target_state, tau));
    } else {
      names.push_back(space.names()[i]);
    }
  }
  const auto absorbing = space.absorbing_indices();

  auto expand_one = [&](const Matrix& p) {
    Matrix q = Matrix::Zero(static_cast<Eigen::Index>(n_exp), static_cast<Eigen::Index>(n_exp));
    const auto tunnel = [&](int tau) { return static_cast<Eigen::Index>(k) + tau - 1; };
    const auto ex = [&](std::size_t i) {
      return static_cast<Eigen::Index>(expanded_index(i, k, T));
    };
    const auto ki = static_cast<Eigen::Index>(k);
    const auto gi = static_cast<Eigen::Index>(g);

    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == k) continue;
        q(ex(i), ex(j)) = p(ii, static_cast<Eigen::Index>(j));
      }
      q(ex(i), tunnel(1)) = p(ii, ki);
    }

    double death = 0.0;
    for (auto a : absorbing) death += p(ki, static_cast<Eigen::Index>(a));
    const double survival = 1.0 - death;
    for (int tau = 1; tau <= T; ++tau) {
      const auto row = tunnel(tau);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == k || j == g) continue;
        q(row, ex(j)) = p(ki, static_cast<Eigen::Index>(j));
      }
      const double progress = survival * spec.exit_probabilities[static_cast<std::size_t>(tau - 1)];
      double stay = p(ki, ki) + p(ki, gi) - progress;
      if (stay < 0.0) {
        if (stay < -1e-12) {
          throw ValidationError(fmt::format(
              "tunnel {} (tau = {}): continuation probability {} is negative",
              tunnel_label(spec.target_state, tau), tau, stay));
        }
        stay = 0.0;
      }
      q(row, ex(g)) = progress;
      q(row, tau < T ? tunnel(tau + 1) : row) = stay;
    }
    return q;
  };

  std::vector<std::string> absorbing_names = space.absorbing();
  StateSpace expanded_space(std::move(names), std::move(absorbing_names));

  if (tm.kind() == ModelKind::constant) {
    auto model = TransitionModel::constant(expand_one(tm.at(0)), tm.horizon());
    require_valid(expanded_space, model);
    return {std::move(expanded_space), std::move(model), k, T};
  }
  std::vector<Matrix> blocks;
  blocks.reserve(tm.matrices().size());
  for (const auto& p : tm.matrices()) blocks.push_back(expand_one(p));
  auto model = TransitionModel::time_varying(std::move(blocks));
  require_valid(expanded_space, model);
  return {std::move(expanded_space), std::move(model), k, T};
}

StateVector expand_initial(const ExpandedModel& expanded, const StateSpace& compact,
                           const StateVector& init) {
  if (init.size() != compact.size()) {
    throw StructuralError("initial vector does not match the compact state space");
  }
  RowVector v = RowVector::Zero(static_cast<Eigen::Index>(expanded.space.size()));
  for (std::size_t i = 0; i < compact.size(); ++i) {
    v(static_cast<Eigen::Index>(expanded_index(i, expanded.first_tunnel, expanded.length))) +=
        init[i];
  }
  return StateVector(std::move(v));
}

CohortTrace aggregate_trace(const CohortTrace& expanded_trace, const StateSpace& compact,
                            const TunnelSpec& spec) {
  const auto k = compact.index_of(spec.target_state);
  const int T = spec.length();
  const std::size_t n = compact.size();
  if (expanded_trace.n_states() != n + static_cast<std::size_t>(T) - 1) {
    throw StructuralError(fmt::format("expanded trace has {} states, expected {}",
                                      expanded_trace.n_states(), n + static_cast<std::size_t>(T) - 1));
  }
  const Matrix& m = expanded_trace.matrix();
  Matrix out(m.rows(), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    if (i == k) {
      out.col(col) = m.middleCols(static_cast<Eigen::Index>(k), T).rowwise().sum();
    } else {
      out.col(col) = m.col(static_cast<Eigen::Index>(expanded_index(i, k, T)));
    }
  }
  return CohortTrace(std::move(out));
}

}  // namespace cstm
