#pragma once

#include "cstm/analysis.hpp"
#include "cstm/psa.hpp"
#include "cstm/transforms.hpp"

#include <string_view>
#include <vector>

namespace cstm {

// Four-state Healthy / Sick / Sicker / Dead cohort model with four strategies:
// standard of care (SoC), treatment A, treatment B, and both (AB).
struct SickSickerParams {
  int n_age_init = 25;
  int n_age_max = 100;
  int n_t = 75;

  double p_HD = 0.002;
  double p_HS1 = 0.15;
  double p_S1H = 0.5;
  double p_S1S2 = 0.105;
  double hr_S1 = 3.0;
  double hr_S2 = 10.0;
  double or_S1S2 = 0.6;

  double c_H = 2000.0;
  double c_S1 = 4000.0;
  double c_S2 = 15000.0;
  double c_D = 0.0;
  double c_trtA = 12000.0;
  double c_trtB = 13000.0;

  double u_H = 1.0;
  double u_S1 = 0.75;
  double u_S2 = 0.5;
  double u_D = 0.0;
  double u_trtA = 0.95;

  double du_HS1 = 0.01;
  double ic_HS1 = 1000.0;
  double ic_D = 2000.0;

  double d_c = 0.03;
  double d_e = 0.03;

  double weibull_scale = 0.08;
  double weibull_shape = 1.1;

  // Real-valued parameters by name (the integer horizon fields excluded).
  ParameterValues values() const;
  // Overwrites every named field present in `v`; unknown names throw ConfigError.
  void assign(const ParameterValues& v);
};

enum class Variant { time_independent, age_dependent, tunnels };

const char* to_string(Variant v);
Variant variant_from_string(std::string_view name);

inline const std::vector<std::string> kSickSickerStates = {"H", "S1", "S2", "D"};
inline const std::vector<std::string> kSickSickerStrategies = {"SoC", "A", "B", "AB"};

// SoC and A share the standard-care transition model, B and AB the treatment-B
// model. `life_table` is required for the age-dependent and tunnel variants.
std::vector<StrategyModel> build_strategy_models(const SickSickerParams& params,
                                                 const LifeTable* life_table, Variant variant);

AnalysisSettings analysis_settings(const SickSickerParams& params);

struct SickSickerReport {
  AnalysisReport analysis;
  double life_expectancy = 0.0;  // standard of care, cycles
};

SickSickerReport run_full_analysis(const SickSickerParams& params, const LifeTable& life_table,
                                   Variant variant = Variant::age_dependent);

}  // namespace cstm
