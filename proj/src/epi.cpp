#include "cstm/epi.hpp"

#include "cstm/error.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace cstm {

namespace {

std::vector<std::size_t> indices(const StateSpace& space, const std::vector<std::string>& labels) {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(space.index_of(l));
  return out;
}

double occupancy(const CohortTrace& trace, int t, const std::vector<std::size_t>& idx) {
  double s = 0.0;
  for (auto i : idx) s += trace.at(t, i);
  return s;
}

std::string join(const std::vector<std::string>& labels) {
  std::string out;
  for (const auto& l : labels) out += (out.empty() ? "" : "+") + l;
  return out;
}

int first_defined(const std::vector<std::optional<double>>& v) {
  auto it = std::find_if(v.begin(), v.end(), [](const auto& x) { return x.has_value(); });
  return static_cast<int>(it - v.begin());
}

}  // namespace

EpiSeries survival(const CohortTrace& trace, const StateSpace& space,
                   const std::vector<std::string>& death_states) {
  const auto dead = indices(space, death_states);
  EpiSeries s{"survival", {}, 0};
  s.values.reserve(static_cast<std::size_t>(trace.horizon()) + 1);
  for (int t = 0; t <= trace.horizon(); ++t) s.values.emplace_back(1.0 - occupancy(trace, t, dead));
  return s;
}

EpiSeries prevalence(const CohortTrace& trace, const StateSpace& space,
                     const std::vector<std::string>& states,
                     const std::vector<std::string>& death_states) {
  for (const auto& s : states) {
    if (std::find(death_states.begin(), death_states.end(), s) != death_states.end()) {
      throw StructuralError(fmt::format("prevalence state '{}' is also a death state", s));
    }
  }
  const auto num = indices(space, states);
  const auto surv = survival(trace, space, death_states);
  EpiSeries out{"prev_" + join(states), {}, 0};
  for (int t = 0; t <= trace.horizon(); ++t) {
    const double alive = *surv.values[static_cast<std::size_t>(t)];
    if (alive > 0.0) {
      out.values.emplace_back(occupancy(trace, t, num) / alive);
    } else {
      out.values.emplace_back(std::nullopt);
    }
  }
  out.valid_from = first_defined(out.values);
  return out;
}

EpiSeries proportion_among(const CohortTrace& trace, const StateSpace& space,
                           const std::vector<std::string>& numerator,
                           const std::vector<std::string>& denominator) {
  for (const auto& s : numerator) {
    if (std::find(denominator.begin(), denominator.end(), s) == denominator.end()) {
      throw StructuralError(fmt::format("numerator state '{}' is not in the denominator set", s));
    }
  }
  const auto num = indices(space, numerator);
  const auto den = indices(space, denominator);
  EpiSeries out{"prop_" + join(numerator) + "_among_" + join(denominator), {}, 0};
  for (int t = 0; t <= trace.horizon(); ++t) {
    const double d = occupancy(trace, t, den);
    if (d > 0.0) {
      out.values.emplace_back(occupancy(trace, t, num) / d);
    } else {
      out.values.emplace_back(std::nullopt);
    }
  }
  out.valid_from = first_defined(out.values);
  return out;
}

double life_expectancy(const EpiSeries& survival) {
  double le = 0.0;
  for (const auto& v : survival.values) {
    if (!v) throw StructuralError("survival series has undefined cycles");
    le += *v;
  }
  return le;
}

}  // namespace cstm
