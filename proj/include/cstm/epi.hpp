#pragma once

#include "cstm/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cstm {

// Per-cycle epidemiological series. Cycles where the quantity is undefined
// (zero denominator) hold std::nullopt.
struct EpiSeries {
  std::string label;
  std::vector<std::optional<double>> values;
  int valid_from = 0;  // first cycle with a defined value

  std::size_t size() const { return values.size(); }
};

EpiSeries survival(const CohortTrace& trace, const StateSpace& space,
                   const std::vector<std::string>& death_states);

EpiSeries prevalence(const CohortTrace& trace, const StateSpace& space,
                     const std::vector<std::string>& states,
                     const std::vector<std::string>& death_states);

EpiSeries proportion_among(const CohortTrace& trace, const StateSpace& space,
                           const std::vector<std::string>& numerator,
                           const std::vector<std::string>& denominator);

// Sum of S(t) over t = 0..n_t, in cycle units.
double life_expectancy(const EpiSeries& survival);

}  // namespace cstm
