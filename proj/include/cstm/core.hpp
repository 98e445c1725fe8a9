#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cstm {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

inline constexpr double kDefaultRowSumTolerance = 1e-12;

// Ordered, mutually exclusive health states. Index i of every vector and
// matrix dimension refers to names()[i].
class StateSpace {
 public:
  StateSpace(std::vector<std::string> names, std::vector<std::string> absorbing = {});

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::string>& absorbing() const { return absorbing_; }

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws StructuralError naming the missing label.
  std::size_t index_of(std::string_view name) const;
  bool is_absorbing(std::size_t i) const;
  std::vector<std::size_t> absorbing_indices() const;

  bool operator==(const StateSpace&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::string> absorbing_;
};

// Distribution of the cohort across states at one cycle.
class StateVector {
 public:
  explicit StateVector(RowVector values);

  const RowVector& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_(static_cast<Eigen::Index>(i)); }

  // Unit mass in one state.
  static StateVector concentrated(std::size_t n_states, std::size_t state);

 private:
  RowVector values_;
};

enum class ModelKind { constant, time_varying };

// Per-cycle transition probabilities. A constant model reuses one matrix for
// every cycle; a time-varying model carries exactly `horizon` matrices, the
// matrix at index t moving the cohort from cycle t to cycle t+1.
class TransitionModel {
 public:
  static TransitionModel constant(Matrix p, int horizon);
  static TransitionModel time_varying(std::vector<Matrix> per_cycle);

  ModelKind kind() const { return kind_; }
  int horizon() const { return horizon_; }
  std::size_t n_states() const { return static_cast<std::size_t>(matrices_.front().rows()); }
  const Matrix& at(int cycle) const;
  const std::vector<Matrix>& matrices() const { return matrices_; }

 private:
  TransitionModel(ModelKind kind, std::vector<Matrix> matrices, int horizon);

  ModelKind kind_;
  std::vector<Matrix> matrices_;
  int horizon_;
};

// (n_t + 1) x n_s occupancy matrix; row t is the state vector at cycle t.
class CohortTrace {
 public:
  explicit CohortTrace(Matrix rows);

  const Matrix& matrix() const { return rows_; }
  int horizon() const { return static_cast<int>(rows_.rows()) - 1; }
  std::size_t n_states() const { return static_cast<std::size_t>(rows_.cols()); }
  RowVector row(int cycle) const { return rows_.row(cycle); }
  double at(int cycle, std::size_t state) const {
    return rows_(cycle, static_cast<Eigen::Index>(state));
  }

 private:
  Matrix rows_;
};

// Origin x destination flows per cycle. Slice 0 carries the initial vector on
// its diagonal; slice t >= 1 is diag(m_{t-1}) * P_{t-1}.
class TransitionDynamics {
 public:
  explicit TransitionDynamics(std::vector<Matrix> slices);

  const std::vector<Matrix>& slices() const { return slices_; }
  const Matrix& slice(int cycle) const { return slices_.at(static_cast<std::size_t>(cycle)); }
  int horizon() const { return static_cast<int>(slices_.size()) - 1; }

 private:
  std::vector<Matrix> slices_;
};

struct Violation {
  enum class Kind { entry_out_of_range, row_sum, absorbing_row };
  Kind kind;
  int cycle;
  std::size_t row;
  std::optional<std::size_t> column;  // set for entry violations
  double value;                       // offending entry or row sum

  std::string describe(const StateSpace& space) const;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary(const StateSpace& space, std::size_t max_items = 10) const;
};

// Checks entries in [0,1], row sums within `tol` of 1, and unit rows for
// absorbing states. Throws StructuralError when matrix shapes do not match
// the state space.
ValidationReport validate_transition_model(const StateSpace& space, const TransitionModel& tm,
                                           double tol = kDefaultRowSumTolerance);

// Throws ValidationError carrying the report summary if validation fails.
void require_valid(const StateSpace& space, const TransitionModel& tm,
                   double tol = kDefaultRowSumTolerance);

// Validates `init` (entries in [0,1], sums to 1 within 1e-12).
void require_valid(const StateVector& init);

CohortTrace simulate_cohort(const StateSpace& space, const StateVector& init,
                            const TransitionModel& tm, double tol = kDefaultRowSumTolerance);

TransitionDynamics transition_dynamics(const CohortTrace& trace, const TransitionModel& tm);

}  // namespace cstm
