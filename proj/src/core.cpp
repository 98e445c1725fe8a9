#include "cstm/core.hpp"

#include "cstm/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace cstm {

StateSpace::StateSpace(std::vector<std::string> names, std::vector<std::string> absorbing)
    : names_(std::move(names)), absorbing_(std::move(absorbing)) {
  if (names_.size() < 2) {
    throw StructuralError(fmt::format("state space needs at least 2 states, got {}", names_.size()));
  }
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw StructuralError("state labels must be nonempty");
    if (!seen.insert(n).second) throw StructuralError(fmt::format("duplicate state label '{}'", n));
  }
  for (const auto& a : absorbing_) {
    if (!seen.contains(a)) {
      throw StructuralError(fmt::format("absorbing state '{}' is not in the state space", a));
    }
  }
}

std::optional<std::size_t> StateSpace::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t StateSpace::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw StructuralError(fmt::format("unknown state '{}'", name));
}

bool StateSpace::is_absorbing(std::size_t i) const {
  return std::find(absorbing_.begin(), absorbing_.end(), names_.at(i)) != absorbing_.end();
}

std::vector<std::size_t> StateSpace::absorbing_indices() const {
  std::vector<std::size_t> out;
  for (const auto& a : absorbing_) out.push_back(index_of(a));
  std::sort(out.begin(), out.end());
  return out;
}

StateVector::StateVector(RowVector values) : values_(std::move(values)) {}

StateVector StateVector::concentrated(std::size_t n_states, std::size_t state) {
  RowVector v = RowVector::Zero(static_cast<Eigen::Index>(n_states));
  v(static_cast<Eigen::Index>(state)) = 1.0;
  return StateVector(std::move(v));
}

TransitionModel::TransitionModel(ModelKind kind, std::vector<Matrix> matrices, int horizon)
    : kind_(kind), matrices_(std::move(matrices)), horizon_(horizon) {}

TransitionModel TransitionModel::constant(Matrix p, int horizon) {
  if (horizon < 1) throw StructuralError(fmt::format("horizon must be positive, got {}", horizon));
  if (p.rows() != p.cols()) throw StructuralError("transition matrix must be square");
  std::vector<Matrix> m;
  m.push_back(std::move(p));
  return TransitionModel(ModelKind::constant, std::move(m), horizon);
}

TransitionModel TransitionModel::time_varying(std::vector<Matrix> per_cycle) {
  if (per_cycle.empty()) throw StructuralError("time-varying model needs at least one matrix");
  const auto n = per_cycle.front().rows();
  for (std::size_t t = 0; t < per_cycle.size(); ++t) {
    if (per_cycle[t].rows() != n || per_cycle[t].cols() != n) {
      throw StructuralError(fmt::format("matrix for cycle {} is {}x{}, expected {}x{}", t,
                                        per_cycle[t].rows(), per_cycle[t].cols(), n, n));
    }
  }
  const int horizon = static_cast<int>(per_cycle.size());
  return TransitionModel(ModelKind::time_varying, std::move(per_cycle), horizon);
}

const Matrix& TransitionModel::at(int cycle) const {
  if (cycle < 0 || cycle >= horizon_) {
    throw StructuralError(fmt::format("cycle {} outside model horizon 0..{}", cycle, horizon_ - 1));
  }
  return kind_ == ModelKind::constant ? matrices_.front()
                                      : matrices_[static_cast<std::size_t>(cycle)];
}

CohortTrace::CohortTrace(Matrix rows) : rows_(std::move(rows)) {}

TransitionDynamics::TransitionDynamics(std::vector<Matrix> slices) : slices_(std::move(slices)) {}

std::string Violation::describe(const StateSpace& space) const {
  const auto& from = space.names().at(row);
  switch (kind) {
    case Kind::entry_out_of_range:
      return fmt::format("cycle {}: P[{}, {}] = {} outside [0, 1]", cycle, from,
                         space.names().at(*column), value);
    case Kind::row_sum:
      return fmt::format("cycle {}: row {} sums to {:.17g}", cycle, from, value);
    case Kind::absorbing_row:
      return fmt::format("cycle {0}: absorbing state {1} has P[{1}, {1}] = {2}", cycle, from, value);
  }
  return {};
}

std::string ValidationReport::summary(const StateSpace& space, std::size_t max_items) const {
  std::string out = fmt::format("{} violation(s)", violations.size());
  for (std::size_t i = 0; i < violations.size() && i < max_items; ++i) {
    out += "\n  " + violations[i].describe(space);
  }
  if (violations.size() > max_items) out += "\n  ...";
  return out;
}

ValidationReport validate_transition_model(const StateSpace& space, const TransitionModel& tm,
                                           double tol) {
  const auto n = static_cast<Eigen::Index>(space.size());
  ValidationReport report;
  const auto absorbing = space.absorbing_indices();
  const int n_blocks = static_cast<int>(tm.matrices().size());
  for (int b = 0; b < n_blocks; ++b) {
    const Matrix& p = tm.matrices()[static_cast<std::size_t>(b)];
    if (p.rows() != n || p.cols() != n) {
      throw StructuralError(fmt::format("cycle {} matrix is {}x{} but the state space has {} states",
                                        b, p.rows(), p.cols(), n));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      double sum = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double v = p(i, j);
        if (!(v >= 0.0 && v <= 1.0)) {
          report.violations.push_back({Violation::Kind::entry_out_of_range, b,
                                       static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                                       v});
        }
        sum += v;
      }
      if (!(std::abs(sum - 1.0) <= tol)) {
        report.violations.push_back(
            {Violation::Kind::row_sum, b, static_cast<std::size_t>(i), std::nullopt, sum});
      }
    }
    for (auto a : absorbing) {
      const auto ai = static_cast<Eigen::Index>(a);
      if (p(ai, ai) != 1.0) {
        report.violations.push_back(
            {Violation::Kind::absorbing_row, b, a, std::nullopt, p(ai, ai)});
      }
    }
  }
  return report;
}

void require_valid(const StateSpace& space, const TransitionModel& tm, double tol) {
  auto report = validate_transition_model(space, tm, tol);
  if (!report.ok()) {
    throw ValidationError("invalid transition model: " + report.summary(space));
  }
}

void require_valid(const StateVector& init) {
  double sum = 0.0;
  for (std::size_t i = 0; i < init.size(); ++i) {
    if (!(init[i] >= 0.0 && init[i] <= 1.0)) {
      throw ValidationError(fmt::format("initial vector entry {} = {} outside [0, 1]", i, init[i]));
    }
    sum += init[i];
  }
  if (!(std::abs(sum - 1.0) <= 1e-12)) {
    throw ValidationError(fmt::format("initial vector sums to {:.17g}, expected 1", sum));
  }
}

CohortTrace simulate_cohort(const StateSpace& space, const StateVector& init,
                            const TransitionModel& tm, double tol) {
  if (init.size() != space.size()) {
    throw StructuralError(fmt::format("initial vector has {} entries, state space has {}",
                                      init.size(), space.size()));
  }
  require_valid(init);
  require_valid(space, tm, tol);

  const int n_t = tm.horizon();
  Matrix rows(n_t + 1, static_cast<Eigen::Index>(space.size()));
  rows.row(0) = init.values();
  for (int t = 0; t < n_t; ++t) {
    rows.row(t + 1) = rows.row(t) * tm.at(t);
    if (!rows.row(t + 1).allFinite()) {
      throw NumericError(fmt::format("non-finite state vector produced at cycle {}", t + 1));
    }
  }
  return CohortTrace(std::move(rows));
}

TransitionDynamics transition_dynamics(const CohortTrace& trace, const TransitionModel& tm) {
  if (trace.horizon() != tm.horizon()) {
    throw StructuralError(fmt::format("trace covers {} cycles but the model covers {}",
                                      trace.horizon(), tm.horizon()));
  }
  if (trace.n_states() != tm.n_states()) {
    throw StructuralError(fmt::format("trace has {} states but the model has {}",
                                      trace.n_states(), tm.n_states()));
  }
  std::vector<Matrix> slices;
  slices.reserve(static_cast<std::size_t>(trace.horizon()) + 1);
  slices.emplace_back(trace.row(0).asDiagonal());
  for (int t = 1; t <= trace.horizon(); ++t) {
    slices.emplace_back(trace.row(t - 1).asDiagonal() * tm.at(t - 1));
  }
  return TransitionDynamics(std::move(slices));
}

}  // namespace cstm
