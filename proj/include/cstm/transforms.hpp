#pragma once

#include <filesystem>
#include <map>
#include <vector>

namespace cstm {

// Constant-hazard conversions between a per-cycle probability and a rate.
double prob_to_rate(double p);
double rate_to_prob(double r);

// Hazard ratios act on the rate scale: 1 - (1 - p)^hr.
double apply_hazard_ratio(double p, double hr);

// Odds ratios act on the logit scale.
double apply_odds_ratio(double p, double odds_ratio);

// Age-specific all-cause mortality hazards (per year), keyed by integer age.
class LifeTable {
 public:
  explicit LifeTable(std::map<int, double> rates);

  // Two-column delimited text with a header row: age, value. When
  // `values_are_probabilities` is set the second column is converted with
  // prob_to_rate on load.
  static LifeTable load(const std::filesystem::path& path, bool values_are_probabilities = false);

  const std::map<int, double>& rates() const { return rates_; }
  double rate(int age) const;
  int min_age() const { return rates_.begin()->first; }
  int max_age() const { return rates_.rbegin()->first; }

 private:
  std::map<int, double> rates_;
};

// Element t = rate_to_prob(mu(start_age + t)) for t = 0..n_t-1.
std::vector<double> mortality_vector(const LifeTable& lt, int start_age, int n_t);

}  // namespace cstm
