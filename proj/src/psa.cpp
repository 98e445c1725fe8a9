#include "cstm/psa.hpp"

#include "cstm/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <thread>

namespace cstm {

const char* to_string(Family f) {
  switch (f) {
    case Family::fixed: return "fixed";
    case Family::beta: return "beta";
    case Family::gamma: return "gamma";
    case Family::lognormal: return "lognormal";
    case Family::normal: return "normal";
    case Family::uniform: return "uniform";
  }
  return "?";
}

Family family_from_string(std::string_view name) {
  for (auto f : {Family::fixed, Family::beta, Family::gamma, Family::lognormal, Family::normal,
                 Family::uniform}) {
    if (name == to_string(f)) return f;
  }
  throw ConfigError(fmt::format("unknown distribution family '{}'", name));
}

double ParameterDistribution::mean() const {
  switch (family) {
    case Family::fixed: return a;
    case Family::beta: return a / (a + b);
    case Family::gamma: return a * b;
    case Family::lognormal: return std::exp(a + 0.5 * b * b);
    case Family::normal: return a;
    case Family::uniform: return 0.5 * (a + b);
  }
  return 0.0;
}

void ParameterDistribution::validate() const {
  auto fail = [this](std::string_view why) {
    throw DomainError(fmt::format("parameter '{}' ({}): {}", name, to_string(family), why));
  };
  if (!std::isfinite(a) || !std::isfinite(b)) fail("non-finite family parameter");
  switch (family) {
    case Family::fixed: break;
    case Family::beta:
      if (!(a > 0.0 && b > 0.0)) fail("shapes must be positive");
      break;
    case Family::gamma:
      if (!(a > 0.0 && b > 0.0)) fail("shape and scale must be positive");
      break;
    case Family::lognormal:
    case Family::normal:
      if (!(b >= 0.0)) fail("standard deviation must be nonnegative");
      break;
    case Family::uniform:
      if (!(a <= b)) fail("min must not exceed max");
      break;
  }
}

ParameterDistribution ParameterDistribution::fixed(std::string name, double value, Support s) {
  return {std::move(name), Family::fixed, value, 0.0, s};
}

ParameterDistribution ParameterDistribution::beta_mean_sd(std::string name, double mean, double sd) {
  const double var = sd * sd;
  if (!(mean > 0.0 && mean < 1.0) || !(var > 0.0 && var < mean * (1.0 - mean))) {
    throw DomainError(fmt::format("parameter '{}': no beta distribution with mean {} and sd {}",
                                  name, mean, sd));
  }
  const double k = mean * (1.0 - mean) / var - 1.0;
  return {std::move(name), Family::beta, mean * k, (1.0 - mean) * k, Support::probability};
}

ParameterDistribution ParameterDistribution::gamma_mean_sd(std::string name, double mean, double sd) {
  if (!(mean > 0.0 && sd > 0.0)) {
    throw DomainError(fmt::format("parameter '{}': gamma needs positive mean and sd", name));
  }
  const double var = sd * sd;
  return {std::move(name), Family::gamma, mean * mean / var, var / mean, Support::nonnegative};
}

ParameterDistribution ParameterDistribution::lognormal_mean_sd(std::string name, double mean,
                                                               double sd) {
  if (!(mean > 0.0 && sd > 0.0)) {
    throw DomainError(fmt::format("parameter '{}': lognormal needs positive mean and sd", name));
  }
  const double s2 = std::log1p(sd * sd / (mean * mean));
  return {std::move(name), Family::lognormal, std::log(mean) - 0.5 * s2, std::sqrt(s2),
          Support::positive};
}

ParameterValues PsaSampleSet::row(std::size_t i) const {
  ParameterValues out;
  const auto& r = rows.at(i);
  for (std::size_t k = 0; k < names.size(); ++k) out.emplace(names[k], r[k]);
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

double draw(const ParameterDistribution& d, std::mt19937_64& rng) {
  switch (d.family) {
    case Family::fixed: return d.a;
    case Family::beta: {
      const double x = std::gamma_distribution<double>(d.a, 1.0)(rng);
      const double y = std::gamma_distribution<double>(d.b, 1.0)(rng);
      return x / (x + y);
    }
    case Family::gamma: return std::gamma_distribution<double>(d.a, d.b)(rng);
    case Family::lognormal: return std::exp(d.a + d.b * std::normal_distribution<double>(0.0, 1.0)(rng));
    case Family::normal: return d.a + d.b * std::normal_distribution<double>(0.0, 1.0)(rng);
    case Family::uniform: return d.a + (d.b - d.a) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  }
  return 0.0;
}

bool in_support(double v, Support s) {
  if (!std::isfinite(v)) return false;
  switch (s) {
    case Support::real: return true;
    case Support::nonnegative: return v >= 0.0;
    case Support::positive: return v > 0.0;
    case Support::probability: return v >= 0.0 && v <= 1.0;
  }
  return false;
}

}  // namespace

PsaSampleSet generate_psa_params(const std::vector<ParameterDistribution>& dists, std::size_t n_sim,
                                 std::uint64_t seed) {
  if (n_sim < 1) throw DomainError("n_sim must be at least 1");
  PsaSampleSet set;
  set.seed = seed;
  for (const auto& d : dists) {
    d.validate();
    set.names.push_back(d.name);
  }
  set.rows.reserve(n_sim);
  for (std::size_t i = 0; i < n_sim; ++i) {
    auto rng = substream(seed, i);
    std::vector<double> row;
    row.reserve(dists.size());
    for (const auto& d : dists) {
      const double v = draw(d, rng);
      if (!in_support(v, d.support)) {
        throw DomainError(fmt::format("sample {}: parameter '{}' drew {} outside its support", i,
                                      d.name, v));
      }
      row.push_back(v);
    }
    set.rows.push_back(std::move(row));
  }
  return set;
}

PsaOutcomes evaluate_psa(const PsaSampleSet& samples, const PsaEvaluator& evaluator,
                         unsigned threads) {
  const std::size_t n = samples.n_sim();
  if (n == 0) throw DomainError("PSA sample set is empty");
  std::vector<std::vector<StrategyOutcome>> results(n);
  std::vector<std::optional<std::string>> errors(n);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  auto work = [&](unsigned worker) {
    for (std::size_t i = worker; i < n; i += threads) {
      try {
        results[i] = evaluator(samples.row(i));
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) throw Error(fmt::format("PSA evaluation failed on sample {}: {}", i, *errors[i]));
  }

  PsaOutcomes out;
  for (const auto& o : results.front()) out.strategies.push_back(o.label);
  out.cost.reserve(n);
  out.effect.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i].size() != out.strategies.size()) {
      throw Error(fmt::format("sample {} returned {} strategies, expected {}", i, results[i].size(),
                              out.strategies.size()));
    }
    std::vector<double> c, e;
    for (std::size_t s = 0; s < results[i].size(); ++s) {
      const auto& o = results[i][s];
      if (o.label != out.strategies[s]) {
        throw Error(fmt::format("sample {} returned strategy '{}' where '{}' was expected", i,
                                o.label, out.strategies[s]));
      }
      if (!std::isfinite(o.cost) || !std::isfinite(o.effect)) {
        throw NumericError(fmt::format("sample {}: non-finite outcome for '{}'", i, o.label));
      }
      c.push_back(o.cost);
      e.push_back(o.effect);
    }
    out.cost.push_back(std::move(c));
    out.effect.push_back(std::move(e));
  }
  return out;
}

std::vector<double> wtp_grid(double max, double step) {
  if (!(max >= 0.0) || !(step > 0.0)) throw DomainError("wtp grid needs max >= 0 and step > 0");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor(max / step + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(static_cast<double>(k) * step);
  return out;
}

namespace {

void check_grid(const PsaOutcomes& outcomes, const std::vector<double>& wtp) {
  if (wtp.empty()) throw DomainError("wtp grid is empty");
  for (double w : wtp) {
    if (!(w >= 0.0)) throw DomainError(fmt::format("wtp value {} must be nonnegative", w));
  }
  if (outcomes.n_sim() == 0 || outcomes.strategies.empty()) throw DomainError("no PSA outcomes");
}

}  // namespace

AcceptabilityCurves ceac(const PsaOutcomes& outcomes, const std::vector<double>& wtp) {
  check_grid(outcomes, wtp);
  const std::size_t n = outcomes.n_sim();
  const std::size_t ns = outcomes.strategies.size();
  AcceptabilityCurves out;
  out.wtp = wtp;
  std::vector<double> nmb(ns);
  for (double w : wtp) {
    std::vector<double> wins(ns, 0.0);
    std::vector<double> mean_nmb(ns, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t s = 0; s < ns; ++s) {
        nmb[s] = outcomes.effect[i][s] * w - outcomes.cost[i][s];
        mean_nmb[s] += nmb[s];
      }
      const double best = *std::max_element(nmb.begin(), nmb.end());
      const auto tied = static_cast<double>(std::count(nmb.begin(), nmb.end(), best));
      for (std::size_t s = 0; s < ns; ++s) {
        if (nmb[s] == best) wins[s] += 1.0 / tied;
      }
    }
    for (auto& x : wins) x /= static_cast<double>(n);
    out.probability.push_back(std::move(wins));
    out.frontier.push_back(static_cast<std::size_t>(
        std::max_element(mean_nmb.begin(), mean_nmb.end()) - mean_nmb.begin()));
  }
  return out;
}

ExpectedLoss expected_loss_and_evpi(const PsaOutcomes& outcomes, const std::vector<double>& wtp) {
  check_grid(outcomes, wtp);
  const std::size_t n = outcomes.n_sim();
  const std::size_t ns = outcomes.strategies.size();
  ExpectedLoss out;
  out.wtp = wtp;
  std::vector<double> nmb(ns);
  for (double w : wtp) {
    std::vector<double> loss(ns, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t s = 0; s < ns; ++s) nmb[s] = outcomes.effect[i][s] * w - outcomes.cost[i][s];
      const double best = *std::max_element(nmb.begin(), nmb.end());
      for (std::size_t s = 0; s < ns; ++s) loss[s] += best - nmb[s];
    }
    for (auto& x : loss) x /= static_cast<double>(n);
    out.evpi.push_back(*std::min_element(loss.begin(), loss.end()));
    out.loss.push_back(std::move(loss));
  }
  return out;
}

}  // namespace cstm
