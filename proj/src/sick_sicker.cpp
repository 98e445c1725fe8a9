#include "cstm/sick_sicker.hpp"

#include "cstm/epi.hpp"
#include "cstm/error.hpp"

#include <fmt/format.h>

#include <utility>

namespace cstm {

namespace {

template <typename F>
void for_each_field(SickSickerParams& p, F&& f) {
  f("p_HD", p.p_HD);
  f("p_HS1", p.p_HS1);
  f("p_S1H", p.p_S1H);
  f("p_S1S2", p.p_S1S2);
  f("hr_S1", p.hr_S1);
  f("hr_S2", p.hr_S2);
  f("or_S1S2", p.or_S1S2);
  f("c_H", p.c_H);
  f("c_S1", p.c_S1);
  f("c_S2", p.c_S2);
  f("c_D", p.c_D);
  f("c_trtA", p.c_trtA);
  f("c_trtB", p.c_trtB);
  f("u_H", p.u_H);
  f("u_S1", p.u_S1);
  f("u_S2", p.u_S2);
  f("u_D", p.u_D);
  f("u_trtA", p.u_trtA);
  f("du_HS1", p.du_HS1);
  f("ic_HS1", p.ic_HS1);
  f("ic_D", p.ic_D);
  f("d_c", p.d_c);
  f("d_e", p.d_e);
  f("weibull_scale", p.weibull_scale);
  f("weibull_shape", p.weibull_shape);
}

// Background death probabilities for H, S1 and S2 at one cycle.
struct Mortality {
  double h, s1, s2;
};

Matrix transition_matrix(const SickSickerParams& p, const Mortality& m, double p_S1S2) {
  Matrix P = Matrix::Zero(4, 4);
  P(0, 0) = (1.0 - m.h) * (1.0 - p.p_HS1);
  P(0, 1) = (1.0 - m.h) * p.p_HS1;
  P(0, 3) = m.h;
  P(1, 0) = (1.0 - m.s1) * p.p_S1H;
  P(1, 1) = (1.0 - m.s1) * (1.0 - (p.p_S1H + p_S1S2));
  P(1, 2) = (1.0 - m.s1) * p_S1S2;
  P(1, 3) = m.s1;
  P(2, 2) = 1.0 - m.s2;
  P(2, 3) = m.s2;
  P(3, 3) = 1.0;
  return P;
}

std::vector<Mortality> mortality(const SickSickerParams& p, const LifeTable* lt, Variant v) {
  std::vector<Mortality> out;
  if (v == Variant::time_independent) {
    const double r = prob_to_rate(p.p_HD);
    out.push_back({p.p_HD, rate_to_prob(r * p.hr_S1), rate_to_prob(r * p.hr_S2)});
    return out;
  }
  if (lt == nullptr) {
    throw ConfigError(fmt::format("the {} variant needs a life table", to_string(v)));
  }
  for (int t = 0; t < p.n_t; ++t) {
    const double r = lt->rate(p.n_age_init + t);
    out.push_back({rate_to_prob(r), rate_to_prob(r * p.hr_S1), rate_to_prob(r * p.hr_S2)});
  }
  return out;
}

TransitionModel transition_model(const SickSickerParams& p, const std::vector<Mortality>& m,
                                 double p_S1S2) {
  if (m.size() == 1) return TransitionModel::constant(transition_matrix(p, m.front(), p_S1S2), p.n_t);
  std::vector<Matrix> blocks;
  blocks.reserve(m.size());
  for (const auto& mt : m) blocks.push_back(transition_matrix(p, mt, p_S1S2));
  return TransitionModel::time_varying(std::move(blocks));
}

}  // namespace

ParameterValues SickSickerParams::values() const {
  ParameterValues out;
  auto copy = *this;
  for_each_field(copy, [&](const char* name, double& v) { out.emplace(name, v); });
  return out;
}

void SickSickerParams::assign(const ParameterValues& v) {
  std::size_t matched = 0;
  for_each_field(*this, [&](const char* name, double& field) {
    if (auto it = v.find(name); it != v.end()) {
      field = it->second;
      ++matched;
    }
  });
  if (matched != v.size()) {
    const auto known = values();
    for (const auto& [name, _] : v) {
      if (!known.contains(name)) throw ConfigError(fmt::format("unknown parameter '{}'", name));
    }
  }
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::time_independent: return "time-independent";
    case Variant::age_dependent: return "age-dependent";
    case Variant::tunnels: return "tunnels";
  }
  return "?";
}

Variant variant_from_string(std::string_view name) {
  for (auto v : {Variant::time_independent, Variant::age_dependent, Variant::tunnels}) {
    if (name == to_string(v)) return v;
  }
  throw ConfigError(fmt::format("unknown variant '{}'", name));
}

std::vector<StrategyModel> build_strategy_models(const SickSickerParams& p,
                                                 const LifeTable* life_table, Variant variant) {
  const auto m = mortality(p, life_table, variant);
  const double p_S1S2_trtB = apply_odds_ratio(p.p_S1S2, p.or_S1S2);
  const auto soc_model = transition_model(p, m, p.p_S1S2);
  const auto trtB_model = transition_model(p, m, p_S1S2_trtB);

  const StateSpace space(kSickSickerStates, {"D"});
  const auto init = StateVector::concentrated(4, 0);
  const std::vector<TransitionIncrement> cost_inc = {{{"H"}, "S1", p.ic_HS1},
                                                     {{"H", "S1", "S2"}, "D", p.ic_D}};
  const std::vector<TransitionIncrement> util_inc = {{{"H"}, "S1", -p.du_HS1}};

  auto strategy = [&](std::string label, const TransitionModel& tm, double extra_cost, double u_S1) {
    return StrategyModel{std::move(label),
                         space,
                         init,
                         tm,
                         StateRewards({p.c_H, p.c_S1 + extra_cost, p.c_S2 + extra_cost, p.c_D}),
                         StateRewards({p.u_H, u_S1, p.u_S2, p.u_D}),
                         cost_inc,
                         util_inc,
                         std::nullopt,
                         std::nullopt};
  };
  std::vector<StrategyModel> out;
  out.push_back(strategy("SoC", soc_model, 0.0, p.u_S1));
  out.push_back(strategy("A", soc_model, p.c_trtA, p.u_trtA));
  out.push_back(strategy("B", trtB_model, p.c_trtB, p.u_S1));
  out.push_back(strategy("AB", trtB_model, p.c_trtA + p.c_trtB, p.u_trtA));

  if (variant == Variant::tunnels) {
    const auto exits = weibull_progression(p.weibull_scale, p.weibull_shape, p.n_t);
    std::vector<double> exits_trtB;
    exits_trtB.reserve(exits.size());
    for (double e : exits) exits_trtB.push_back(apply_odds_ratio(e, p.or_S1S2));
    const TunnelSpec soc_spec{"S1", "S2", exits};
    const TunnelSpec trtB_spec{"S1", "S2", std::move(exits_trtB)};
    for (auto& s : out) {
      const bool treated_B = s.label == "B" || s.label == "AB";
      s = with_tunnel(s, treated_B ? trtB_spec : soc_spec);
    }
  }
  return out;
}

AnalysisSettings analysis_settings(const SickSickerParams& p) {
  return AnalysisSettings{p.d_c, p.d_e, true};
}

SickSickerReport run_full_analysis(const SickSickerParams& params, const LifeTable& life_table,
                                   Variant variant) {
  const auto models = build_strategy_models(params, &life_table, variant);
  SickSickerReport out{run_analysis(models, analysis_settings(params)), 0.0};
  const auto& soc = out.analysis.strategy("SoC");
  out.life_expectancy = life_expectancy(survival(soc.trace, soc.space, {"D"}));
  return out;
}

}  // namespace cstm
