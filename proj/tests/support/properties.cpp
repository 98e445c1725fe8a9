#include "properties.hpp"

#include "generators.hpp"
#include "oracles.hpp"

#include "cstm/cea.hpp"
#include "cstm/core.hpp"
#include "cstm/psa.hpp"
#include "cstm/rewards.hpp"
#include "cstm/transforms.hpp"
#include "cstm/tunnels.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace cstm::testing {

namespace {

struct Case {
  StateSpace space;
  TransitionModel model;
  StateVector init;
};

Case random_case(Rng& rng) {
  const int n = uniform_int(rng, 2, 7);
  const int n_abs = uniform_int(rng, 0, std::min(2, n - 1));
  auto space = random_space(n, n_abs);
  const int horizon = uniform_int(rng, 1, 40);
  auto model = random_model(rng, space, horizon, uniform(rng) < 0.5);
  auto init = random_init(rng, space.size());
  return {std::move(space), std::move(model), std::move(init)};
}

std::vector<double> as_vector(const RowVector& v) { return {v.data(), v.data() + v.size()}; }

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

}  // namespace

PropertyResult check_mass_conservation(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"mass conservation", cases};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases && r.ok; ++c) {
    const auto k = random_case(rng);
    const auto trace = simulate_cohort(k.space, k.init, k.model);
    const auto oracle = naive_trace(as_vector(k.init.values()), per_cycle_matrices(k.model));
    for (int t = 0; t <= trace.horizon(); ++t) {
      const double sum = trace.row(t).sum();
      if (std::abs(sum - 1.0) > 1e-10) r.fail(fmt::format("case {}: cycle {} sums to {:.17g}", c, t, sum));
      for (std::size_t i = 0; i < trace.n_states(); ++i) {
        const double d = std::abs(trace.at(t, i) - oracle[static_cast<std::size_t>(t)][i]);
        if (d > 1e-12) r.fail(fmt::format("case {}: cycle {} state {} differs from loop oracle by {:.3g}", c, t, i, d));
      }
    }
  }
  return r;
}

PropertyResult check_absorbing_monotonicity(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"absorbing monotonicity", cases};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases && r.ok; ++c) {
    const auto k = random_case(rng);
    const auto trace = simulate_cohort(k.space, k.init, k.model);
    for (auto a : k.space.absorbing_indices()) {
      for (int t = 1; t <= trace.horizon(); ++t) {
        if (trace.at(t, a) < trace.at(t - 1, a)) {
          r.fail(fmt::format("case {}: absorbing state {} drops at cycle {}", c, a, t));
        }
      }
    }
  }
  return r;
}

PropertyResult check_flow_consistency(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"flow consistency", cases};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases && r.ok; ++c) {
    const auto k = random_case(rng);
    const auto trace = simulate_cohort(k.space, k.init, k.model);
    const auto dyn = transition_dynamics(trace, k.model);
    if (dyn.horizon() != trace.horizon()) {
      r.fail(fmt::format("case {}: {} slices for horizon {}", c, dyn.slices().size(), trace.horizon()));
      continue;
    }
    const Matrix& s0 = dyn.slice(0);
    for (Eigen::Index i = 0; i < s0.rows(); ++i) {
      for (Eigen::Index j = 0; j < s0.cols(); ++j) {
        const double expected = i == j ? k.init.values()(i) : 0.0;
        if (s0(i, j) != expected) r.fail(fmt::format("case {}: slice 0 entry ({}, {}) is {}", c, i, j, s0(i, j)));
      }
    }
    for (int t = 1; t <= dyn.horizon(); ++t) {
      const Matrix& a = dyn.slice(t);
      if (a.minCoeff() < 0.0) r.fail(fmt::format("case {}: negative flow in slice {}", c, t));
      if (std::abs(a.sum() - 1.0) > 1e-10) r.fail(fmt::format("case {}: slice {} sums to {:.17g}", c, t, a.sum()));
      const double rows = (a.rowwise().sum().transpose() - trace.row(t - 1)).cwiseAbs().maxCoeff();
      const double cols = (a.colwise().sum() - trace.row(t)).cwiseAbs().maxCoeff();
      if (rows > 1e-10) r.fail(fmt::format("case {}: slice {} row sums off by {:.3g}", c, t, rows));
      if (cols > 1e-10) r.fail(fmt::format("case {}: slice {} column sums off by {:.3g}", c, t, cols));
    }
  }
  return r;
}

PropertyResult check_constant_model_equivalence(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"constant model equivalence", cases};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases && r.ok; ++c) {
    const auto space = random_space(uniform_int(rng, 2, 6), 1);
    const int horizon = uniform_int(rng, 1, 50);
    const Matrix p = random_stochastic(rng, space);
    const auto init = random_init(rng, space.size());
    const auto constant = simulate_cohort(space, init, TransitionModel::constant(p, horizon));
    const auto varying = simulate_cohort(space, init, TransitionModel::time_varying(std::vector<Matrix>(horizon, p)));
    const double d = (constant.matrix() - varying.matrix()).cwiseAbs().maxCoeff();
    if (d > 1e-14) r.fail(fmt::format("case {}: traces differ by {:.3g}", c, d));
  }
  return r;
}

PropertyResult check_rate_probability_round_trip(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"rate/probability round trip", cases};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases && r.ok; ++c) {
    double p = 0.0;
    switch (c % 4) {
      case 0: p = uniform(rng, 0.0, 0.999999); break;
      case 1: p = log_uniform(rng, 1e-15, 0.1); break;
      case 2: p = 0.999999 - log_uniform(rng, 1e-12, 0.1); break;
      default: p = c % 8 == 3 ? 0.0 : 0.999999; break;
    }
    const double back = rate_to_prob(prob_to_rate(p));
    if (std::abs(back - p) > 1e-14) r.fail(fmt::format("p = {:.17g} returns {:.17g}", p, back));
    if (p <= 0.5) {
      const auto oracle = static_cast<double>(neg_log1m_series(p));
      const double rate = prob_to_rate(p);
      if (std::abs(rate - oracle) > 4e-16 * std::max(oracle, 1e-300)) {
        r.fail(fmt::format("prob_to_rate({:.17g}) = {:.17g}, series gives {:.17g}", p, rate, oracle));
      }
    }
  }
  return r;
}

PropertyResult check_ratio_laws(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"hazard and odds ratio laws", cases};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases && r.ok; ++c) {
    const double p = uniform(rng, 1e-3, 0.99);
    const double a = log_uniform(rng, 0.1, 10.0);
    const double b = log_uniform(rng, 0.1, 10.0);
    auto near = [&](double x, double y, double tol, const char* what) {
      if (!(std::abs(x - y) <= tol)) {
        r.fail(fmt::format("{}: p = {:.17g}, a = {:.17g}, b = {:.17g}: {:.17g} vs {:.17g}", what, p, a, b, x, y));
      }
    };
    near(apply_hazard_ratio(p, 1.0), p, 1e-15, "hazard ratio identity");
    near(apply_odds_ratio(p, 1.0), p, 1e-15, "odds ratio identity");
    near(apply_hazard_ratio(p, a), rate_to_prob(a * prob_to_rate(p)), 1e-15, "hazard ratio on the rate scale");
    // Rounding of the intermediate probability propagates through the second step.
    const double eps = std::numeric_limits<double>::epsilon();
    const double qh = apply_hazard_ratio(p, a);
    const double fh = apply_hazard_ratio(p, a * b);
    if (qh < 1.0) {
      near(apply_hazard_ratio(qh, b), fh, 1e-12 + 4 * eps * b * (1 - fh) / (1 - qh), "hazard ratio composition");
    }
    const double qo = apply_odds_ratio(p, a);
    const double denom = 1 - qo + b * qo;
    near(apply_odds_ratio(qo, b), apply_odds_ratio(p, a * b), 1e-12 + 4 * eps * b / (denom * denom),
         "odds ratio composition");
    near(apply_odds_ratio(apply_odds_ratio(p, a), 1.0 / a), p, 1e-12, "odds ratio inverse");

    const double step = 1.0 + 1e-3;
    // Strict only while the step is resolvable below one.
    auto increasing = [](double hi, double lo) { return hi >= lo && (hi > lo || 1.0 - lo < 1e-12); };
    if (!increasing(apply_hazard_ratio(p, a * step), apply_hazard_ratio(p, a))) r.fail("hazard ratio not increasing in hr");
    if (!increasing(apply_odds_ratio(p, a * step), apply_odds_ratio(p, a))) r.fail("odds ratio not increasing in or");
    if (p * step < 1.0) {
      if (!increasing(apply_hazard_ratio(p * step, a), apply_hazard_ratio(p, a))) r.fail("hazard ratio not increasing in p");
      if (!increasing(apply_odds_ratio(p * step, a), apply_odds_ratio(p, a))) r.fail("odds ratio not increasing in p");
    }
    if (a > 1.0 + 1e-9 && !(apply_hazard_ratio(p, a) > p)) r.fail(fmt::format("hr {} > 1 does not raise p", a));
    if (a < 1.0 - 1e-9 && !(apply_odds_ratio(p, a) < p)) r.fail(fmt::format("or {} < 1 does not lower p", a));
  }
  return r;
}

PropertyResult check_reward_diagonal_equivalence(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"reward pipeline diagonal equivalence", cases};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases && r.ok; ++c) {
    const auto k = random_case(rng);
    const int n_t = k.model.horizon();
    const auto n_s = k.space.size();
    auto random_rewards = [&] {
      std::vector<double> v(n_s);
      for (auto& x : v) x = uniform(rng, -100.0, 1000.0);
      return v;
    };
    std::vector<std::vector<double>> per_cycle;
    if (uniform(rng) < 0.5) {
      per_cycle.push_back(random_rewards());
    } else {
      for (int t = 0; t <= n_t; ++t) per_cycle.push_back(random_rewards());
    }
    const auto rewards = per_cycle.size() == 1 ? StateRewards(per_cycle.front()) : StateRewards(per_cycle);

    const auto trace = simulate_cohort(k.space, k.init, k.model);
    const auto dyn = transition_dynamics(trace, k.model);
    const auto y_state = cycle_rewards_state(trace, rewards);
    const auto y_trans = cycle_rewards_transition(dyn, build_reward_matrices(k.space, rewards, {}, n_t));
    const auto d = discount_vector(uniform(rng, 0.0, 0.1), n_t);
    const auto hcc = uniform(rng) < 0.5 ? HalfCycle::standard(n_t) : HalfCycle::none(n_t);
    const double a = total_discounted(y_state, d, hcc);
    const double b = total_discounted(y_trans, d, hcc);
    if (std::abs(a - b) > 1e-9) r.fail(fmt::format("case {}: {:.17g} vs {:.17g}", c, a, b));
  }
  return r;
}

PropertyResult check_reward_laws(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"discounting and half-cycle laws", cases};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases && r.ok; ++c) {
    const int n_t = uniform_int(rng, 1, 80);
    std::vector<double> y1(static_cast<std::size_t>(n_t) + 1);
    std::vector<double> y2(y1.size());
    for (auto& v : y1) v = uniform(rng, 0.0, 1e4);
    for (auto& v : y2) v = uniform(rng, 0.0, 1e4);
    const double d1 = uniform(rng, 0.0, 0.1);
    const double d2 = d1 + uniform(rng, 1e-6, 0.1);
    const auto hcc = HalfCycle::standard(n_t);
    const auto none = HalfCycle::none(n_t);

    const auto w1 = discount_vector(d1, n_t);
    const auto w2 = discount_vector(d2, n_t);
    for (int t = 0; t <= n_t; ++t) {
      const auto oracle = static_cast<double>(inverse_power(d1, t));
      if (std::abs(w1[static_cast<std::size_t>(t)] - oracle) > 1e-14 * oracle) {
        r.fail(fmt::format("discount weight t = {} at d = {:.17g}: {:.17g} vs {:.17g}", t, d1, w1[static_cast<std::size_t>(t)], oracle));
      }
    }
    if (total_discounted(y1, w1, hcc) < total_discounted(y1, w2, hcc)) {
      r.fail(fmt::format("case {}: total rises with the discount rate", c));
    }

    const double corrected = total_discounted(y1, w1, hcc);
    const double uncorrected = total_discounted(y1, w1, none);
    double dropped = 0.0;
    for (int t = 1; t < n_t; ++t) dropped += y1[static_cast<std::size_t>(t)] * w1[static_cast<std::size_t>(t)];
    const double slack = 1e-9 * std::max(1.0, uncorrected);
    if (!(corrected <= uncorrected + slack && corrected >= dropped - slack)) {
      r.fail(fmt::format("case {}: corrected {:.17g} outside [{:.17g}, {:.17g}]", c, corrected, dropped, uncorrected));
    }

    const double alpha = uniform(rng, -3.0, 3.0);
    const double beta = uniform(rng, -3.0, 3.0);
    std::vector<double> mix(y1.size());
    for (std::size_t t = 0; t < mix.size(); ++t) mix[t] = alpha * y1[t] + beta * y2[t];
    const double lhs = total_discounted(mix, w1, hcc);
    const double rhs = alpha * total_discounted(y1, w1, hcc) + beta * total_discounted(y2, w1, hcc);
    if (std::abs(lhs - rhs) > 1e-9 * std::max(1.0, std::abs(uncorrected) * 6.0)) {
      r.fail(fmt::format("case {}: linearity {:.17g} vs {:.17g}", c, lhs, rhs));
    }
  }
  return r;
}

namespace {

struct TunnelCase {
  StateSpace space;
  TransitionModel model;
  StateVector init;
  std::string target;
  std::string progression;
};

// Compact model whose target row has the progression probability equal to
// (1 - death) * lambda at every cycle.
TunnelCase tunnel_case(Rng& rng, double lambda, bool empty_target) {
  const int n = uniform_int(rng, 3, 6);
  const int n_abs = uniform_int(rng, 0, std::min(2, n - 2));
  auto space = random_space(n, n_abs);
  const int n_live = n - n_abs;
  const std::size_t k = static_cast<std::size_t>(uniform_int(rng, 0, n_live - 1));
  std::size_t g = static_cast<std::size_t>(uniform_int(rng, 0, n_live - 2));
  if (g >= k) ++g;
  const int horizon = uniform_int(rng, 1, 30);
  const bool varying = uniform(rng) < 0.5;
  const auto ki = static_cast<Eigen::Index>(k);

  auto matrix = [&] {
    Matrix p = random_stochastic(rng, space);
    p.row(ki).setZero();
    double death = 0.0;
    if (n_abs > 0) {
      death = uniform(rng, 0.0, 0.3);
      std::vector<double> w(static_cast<std::size_t>(n_abs));
      double sum = 0.0;
      for (auto& x : w) sum += (x = uniform(rng, 0.1, 1.0));
      for (int a = 0; a < n_abs; ++a) p(ki, n_live + a) = death * w[static_cast<std::size_t>(a)] / sum;
    }
    p(ki, static_cast<Eigen::Index>(g)) = (1.0 - death) * lambda;
    std::vector<double> w(static_cast<std::size_t>(n_live), 0.0);
    double sum = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (j != g) sum += (w[j] = uniform(rng, 0.1, 1.0));
    }
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (j != g) p(ki, static_cast<Eigen::Index>(j)) = (1.0 - death) * (1.0 - lambda) * w[j] / sum;
    }
    p(ki, ki) += 1.0 - p.row(ki).sum();
    return p;
  };
  std::vector<Matrix> blocks;
  for (int t = 0; t < (varying ? horizon : 1); ++t) blocks.push_back(matrix());
  auto model = varying ? TransitionModel::time_varying(std::move(blocks))
                       : TransitionModel::constant(std::move(blocks.front()), horizon);
  auto init = random_init(rng, space.size());
  if (empty_target) {
    RowVector v = init.values();
    v(ki) = 0.0;
    if (v.sum() == 0.0) v(static_cast<Eigen::Index>(g)) = 1.0;
    v /= v.sum();
    init = StateVector(v);
  }
  return {space, std::move(model), std::move(init), space.names()[k], space.names()[g]};
}

}  // namespace

PropertyResult check_tunnel_shape_one_equivalence(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"tunnel shape-one equivalence", cases};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases && r.ok; ++c) {
    const double lambda = uniform(rng, 0.01, 0.9);
    const auto k = tunnel_case(rng, lambda, false);
    const int length = uniform_int(rng, 1, 12);
    const TunnelSpec spec{k.target, k.progression, weibull_progression(lambda, 1.0, length)};
    const auto ex = expand_tunnels(k.space, k.model, spec);
    const auto expanded = simulate_cohort(ex.space, expand_initial(ex, k.space, k.init), ex.model);
    const auto aggregated = aggregate_trace(expanded, k.space, spec);
    const auto compact = simulate_cohort(k.space, k.init, k.model);
    const double d = (aggregated.matrix() - compact.matrix()).cwiseAbs().maxCoeff();
    if (d > 1e-12) r.fail(fmt::format("case {}: aggregated trace differs by {:.3g}", c, d));
  }
  return r;
}

PropertyResult check_tunnel_causality(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"tunnel occupancy causality", cases};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases && r.ok; ++c) {
    const auto k = tunnel_case(rng, 0.5, true);
    const int length = uniform_int(rng, 1, 15);
    std::vector<double> exits(static_cast<std::size_t>(length));
    for (auto& e : exits) e = uniform(rng, 0.0, 0.5);
    const TunnelSpec spec{k.target, k.progression, exits};
    const auto ex = expand_tunnels(k.space, k.model, spec);
    const auto trace = simulate_cohort(ex.space, expand_initial(ex, k.space, k.init), ex.model);
    for (int tau = 1; tau <= length; ++tau) {
      const auto col = ex.first_tunnel + static_cast<std::size_t>(tau) - 1;
      for (int t = 0; t < std::min(tau, trace.horizon() + 1); ++t) {
        if (trace.at(t, col) != 0.0) r.fail(fmt::format("case {}: tunnel {} occupied at cycle {}", c, tau, t));
      }
    }
    const double mass = (trace.matrix().rowwise().sum().array() - 1.0).abs().maxCoeff();
    if (mass > 1e-10) r.fail(fmt::format("case {}: expanded trace mass off by {:.3g}", c, mass));
  }
  return r;
}

PropertyResult check_frontier_against_enumeration(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"frontier vs exhaustive enumeration", cases};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases && r.ok; ++c) {
    const auto outcomes = random_outcomes(rng, uniform_int(rng, 1, 6));
    auto got = calculate_icers(outcomes).frontier();
    std::sort(got.begin(), got.end());
    const auto expected = frontier_by_enumeration(outcomes);
    if (got != expected) {
      std::string pts;
      for (const auto& o : outcomes) pts += fmt::format(" {}({}, {})", o.label, o.cost, o.effect);
      r.fail(fmt::format("case {}:{} frontier [{}] expected [{}]", c, pts, fmt::join(got, " "),
                         fmt::join(expected, " ")));
    }
  }
  return r;
}

PropertyResult check_frontier_laws(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"frontier ordering, scale and indifference laws", cases};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases && r.ok; ++c) {
    const auto outcomes = random_outcomes(rng, uniform_int(rng, 1, 6));
    const auto table = calculate_icers(outcomes);
    if (table.rows.size() != outcomes.size()) r.fail(fmt::format("case {}: row count", c));

    std::vector<const CeaRow*> nd;
    for (const auto& row : table.rows) {
      if (row.status == Dominance::non_dominated) nd.push_back(&row);
    }
    if (nd.empty()) r.fail(fmt::format("case {}: empty frontier", c));
    for (std::size_t i = 1; i < nd.size(); ++i) {
      if (!(nd[i]->cost > nd[i - 1]->cost && nd[i]->effect > nd[i - 1]->effect)) {
        r.fail(fmt::format("case {}: frontier not increasing at {}", c, nd[i]->label));
      }
      if (i >= 2 && *nd[i]->icer < *nd[i - 1]->icer) r.fail(fmt::format("case {}: ICER falls at {}", c, nd[i]->label));
    }
    if (!nd.empty() && (nd.front()->icer || nd.front()->incremental_cost)) {
      r.fail(fmt::format("case {}: anchor strategy carries incrementals", c));
    }

    for (double factor : {0.25, 2.5, 7.0, 1000.0}) {
      auto scaled = outcomes;
      for (auto& o : scaled) o.cost *= factor;
      const auto t2 = calculate_icers(scaled);
      for (const auto& o : outcomes) {
        if (t2.row(o.label).status != table.row(o.label).status) {
          r.fail(fmt::format("case {}: status of {} changes when costs scale by {}", c, o.label, factor));
        }
      }
    }

    for (std::size_t i = 1; i < nd.size(); ++i) {
      const double wtp = *nd[i]->icer;
      const double a = net_monetary_benefit({nd[i]->label, nd[i]->cost, nd[i]->effect}, wtp);
      const double b = net_monetary_benefit({nd[i - 1]->label, nd[i - 1]->cost, nd[i - 1]->effect}, wtp);
      const double scale = std::max({1.0, std::abs(a), std::abs(b)});
      if (std::abs(a - b) > 1e-6 * scale) r.fail(fmt::format("case {}: not indifferent at ICER {}", c, wtp));
      for (const auto& o : outcomes) {
        if (net_monetary_benefit(o, wtp) > std::max(a, b) + 1e-6 * scale) {
          r.fail(fmt::format("case {}: {} beats the frontier pair at wtp {}", c, o.label, wtp));
        }
      }
    }
  }
  return r;
}

namespace {

struct NmbOracle {
  std::vector<long double> mean_nmb;
  long double mean_max = 0.0L;
};

NmbOracle nmb_oracle(const PsaOutcomes& o, double wtp) {
  NmbOracle out;
  const std::size_t n_s = o.strategies.size();
  out.mean_nmb.assign(n_s, 0.0L);
  for (std::size_t i = 0; i < o.n_sim(); ++i) {
    long double best = -std::numeric_limits<long double>::infinity();
    for (std::size_t s = 0; s < n_s; ++s) {
      const long double v = static_cast<long double>(o.effect[i][s]) * wtp - o.cost[i][s];
      out.mean_nmb[s] += v;
      best = std::max(best, v);
    }
    out.mean_max += best;
  }
  const auto n = static_cast<long double>(o.n_sim());
  for (auto& m : out.mean_nmb) m /= n;
  out.mean_max /= n;
  return out;
}

PsaOutcomes random_psa_case(Rng& rng) {
  auto o = random_psa_outcomes(rng, static_cast<std::size_t>(uniform_int(rng, 1, 400)),
                               static_cast<std::size_t>(uniform_int(rng, 1, 6)));
  if (o.strategies.size() > 1 && uniform(rng) < 0.2) {
    o.strategies.push_back("copy");
    for (std::size_t i = 0; i < o.n_sim(); ++i) {
      o.cost[i].push_back(o.cost[i][0]);
      o.effect[i].push_back(o.effect[i][0]);
    }
  }
  return o;
}

}  // namespace

PropertyResult check_evpi(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"EVPI bounds and identity", cases};
  Rng rng(seed);
  const auto wtp = wtp_grid(200000, 10000);
  for (std::size_t c = 0; c < cases && r.ok; ++c) {
    const auto o = random_psa_case(rng);
    const auto loss = expected_loss_and_evpi(o, wtp);
    for (std::size_t w = 0; w < wtp.size(); ++w) {
      const auto oracle = nmb_oracle(o, wtp[w]);
      const auto max_mean = *std::max_element(oracle.mean_nmb.begin(), oracle.mean_nmb.end());
      const auto identity = static_cast<double>(oracle.mean_max - max_mean);
      const double evpi = loss.evpi[w];
      const double envelope = *std::min_element(loss.loss[w].begin(), loss.loss[w].end());
      if (evpi < 0.0) r.fail(fmt::format("case {}: EVPI {} at wtp {}", c, evpi, wtp[w]));
      if (std::abs(evpi - identity) > 1e-9) {
        r.fail(fmt::format("case {}: EVPI {:.17g} vs identity {:.17g} at wtp {}", c, evpi, identity, wtp[w]));
      }
      if (std::abs(evpi - envelope) > 1e-9) r.fail(fmt::format("case {}: EVPI is not the loss envelope", c));
    }
  }
  return r;
}

PropertyResult check_ceac(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"CEAC sums and CEAF", cases};
  Rng rng(seed);
  const auto wtp = wtp_grid(200000, 10000);
  for (std::size_t c = 0; c < cases && r.ok; ++c) {
    const auto o = random_psa_case(rng);
    const auto curves = ceac(o, wtp);
    const auto loss = expected_loss_and_evpi(o, wtp);
    for (std::size_t w = 0; w < wtp.size(); ++w) {
      double sum = 0.0;
      for (double p : curves.probability[w]) {
        if (p < 0.0 || p > 1.0) r.fail(fmt::format("case {}: probability {} at wtp {}", c, p, wtp[w]));
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) r.fail(fmt::format("case {}: CEAC sums to {:.17g} at wtp {}", c, sum, wtp[w]));
      const auto f = curves.frontier[w];
      const double min_loss = *std::min_element(loss.loss[w].begin(), loss.loss[w].end());
      if (std::abs(loss.loss[w][f] - min_loss) > 1e-9) {
        r.fail(fmt::format("case {}: CEAF strategy {} is not the least-loss strategy at wtp {}", c, f, wtp[w]));
      }
      const auto oracle = nmb_oracle(o, wtp[w]);
      const auto best = *std::max_element(oracle.mean_nmb.begin(), oracle.mean_nmb.end());
      if (static_cast<double>(best - oracle.mean_nmb[f]) > 1e-9) {
        r.fail(fmt::format("case {}: CEAF strategy {} does not maximize mean NMB at wtp {}", c, f, wtp[w]));
      }
    }
  }
  return r;
}

std::vector<PropertyResult> run_core_properties(std::uint64_t seed) {
  return {
      check_mass_conservation(seed + 1, 300),
      check_absorbing_monotonicity(seed + 2, 300),
      check_flow_consistency(seed + 3, 300),
      check_rate_probability_round_trip(seed + 4, 200000),
      check_ratio_laws(seed + 5, 20000),
      check_reward_diagonal_equivalence(seed + 6, 300),
      check_tunnel_shape_one_equivalence(seed + 7, 300),
      check_frontier_against_enumeration(seed + 8, 1000),
      check_evpi(seed + 9, 200),
  };
}

}  // namespace cstm::testing
