#pragma once

#include "cstm/cea.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace cstm {

enum class Family { fixed, beta, gamma, lognormal, normal, uniform };

const char* to_string(Family f);
Family family_from_string(std::string_view name);

// Constraint every sampled value must satisfy.
enum class Support { real, nonnegative, positive, probability };

// Family parameters by position:
//   fixed      (value)
//   beta       (alpha, beta)
//   gamma      (shape, scale)
//   lognormal  (meanlog, sdlog)
//   normal     (mean, sd)
//   uniform    (min, max)
struct ParameterDistribution {
  std::string name;
  Family family = Family::fixed;
  double a = 0.0;
  double b = 0.0;
  Support support = Support::real;

  double mean() const;
  void validate() const;  // throws DomainError for invalid family parameters

  static ParameterDistribution fixed(std::string name, double value, Support s = Support::real);
  // Moment-matched constructors.
  static ParameterDistribution beta_mean_sd(std::string name, double mean, double sd);
  static ParameterDistribution gamma_mean_sd(std::string name, double mean, double sd);
  static ParameterDistribution lognormal_mean_sd(std::string name, double mean, double sd);
};

using ParameterValues = std::map<std::string, double>;

struct PsaSampleSet {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;  // n_sim x names.size()
  std::uint64_t seed = 0;

  std::size_t n_sim() const { return rows.size(); }
  ParameterValues row(std::size_t i) const;
};

// Sample i draws from its own generator seeded by (seed, i), so each row is
// independent of n_sim, evaluation order and thread count.
PsaSampleSet generate_psa_params(const std::vector<ParameterDistribution>& dists, std::size_t n_sim,
                                 std::uint64_t seed);

struct PsaOutcomes {
  std::vector<std::string> strategies;
  std::vector<std::vector<double>> cost;    // [sample][strategy]
  std::vector<std::vector<double>> effect;  // [sample][strategy]

  std::size_t n_sim() const { return cost.size(); }
};

using PsaEvaluator = std::function<std::vector<StrategyOutcome>(const ParameterValues&)>;

// Runs the evaluator on every sample row; threads = 0 picks the hardware
// concurrency. A failing row aborts the run with an Error naming the row.
PsaOutcomes evaluate_psa(const PsaSampleSet& samples, const PsaEvaluator& evaluator,
                         unsigned threads = 0);

std::vector<double> wtp_grid(double max, double step);

struct AcceptabilityCurves {
  std::vector<double> wtp;
  std::vector<std::vector<double>> probability;  // [wtp][strategy]
  std::vector<std::size_t> frontier;             // CEAF: argmax mean NMB per wtp
};

// Fraction of samples in which each strategy has the highest NMB. Ties split
// equally among the tied strategies.
AcceptabilityCurves ceac(const PsaOutcomes& outcomes, const std::vector<double>& wtp);

struct ExpectedLoss {
  std::vector<double> wtp;
  std::vector<std::vector<double>> loss;  // [wtp][strategy]
  std::vector<double> evpi;               // lower envelope of the losses
};

ExpectedLoss expected_loss_and_evpi(const PsaOutcomes& outcomes, const std::vector<double>& wtp);

}  // namespace cstm
