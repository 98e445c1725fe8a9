#include "cstm/transforms.hpp"

#include "cstm/error.hpp"
#include "cstm/table_io.hpp"

#include <fmt/format.h>

#include <cmath>

namespace cstm {

double prob_to_rate(double p) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw DomainError(fmt::format("probability {} outside [0, 1) cannot be converted to a rate", p));
  }
  return -std::log1p(-p);
}

double rate_to_prob(double r) {
  if (!(r >= 0.0) || std::isnan(r)) {
    throw DomainError(fmt::format("rate {} must be nonnegative", r));
  }
  return -std::expm1(-r);
}

double apply_hazard_ratio(double p, double hr) {
  if (!(hr > 0.0) || !std::isfinite(hr)) {
    throw DomainError(fmt::format("hazard ratio {} must be positive and finite", hr));
  }
  return rate_to_prob(hr * prob_to_rate(p));
}

double apply_odds_ratio(double p, double odds_ratio) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError(fmt::format("odds ratio needs 0 < p < 1, got {}", p));
  }
  if (!(odds_ratio > 0.0) || !std::isfinite(odds_ratio)) {
    throw DomainError(fmt::format("odds ratio {} must be positive and finite", odds_ratio));
  }
  const double logit = std::log(p / (1.0 - p)) + std::log(odds_ratio);
  return 1.0 / (1.0 + std::exp(-logit));
}

LifeTable::LifeTable(std::map<int, double> rates) : rates_(std::move(rates)) {
  if (rates_.empty()) throw ConfigError("life table is empty");
  int expected = rates_.begin()->first;
  for (const auto& [age, rate] : rates_) {
    if (age != expected) {
      throw ConfigError(fmt::format("life table ages are not contiguous: missing age {}", expected));
    }
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
      throw ConfigError(fmt::format("life table rate at age {} is invalid ({})", age, rate));
    }
    ++expected;
  }
}

LifeTable LifeTable::load(const std::filesystem::path& path, bool values_are_probabilities) {
  const Table table = read_delimited(path);
  if (table.header.size() < 2) {
    throw ConfigError(fmt::format("{}: life table needs two columns (age, rate)", path.string()));
  }
  std::map<int, double> rates;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() < 2) {
      throw ConfigError(fmt::format("{}:{}: expected 2 fields", path.string(), r + 2));
    }
    const int age = static_cast<int>(parse_number(row[0], path.string(), r + 2));
    double value = parse_number(row[1], path.string(), r + 2);
    if (values_are_probabilities) {
      try {
        value = prob_to_rate(value);
      } catch (const DomainError& e) {
        throw ConfigError(fmt::format("{}: age {}: {}", path.string(), age, e.what()));
      }
    }
    if (!rates.emplace(age, value).second) {
      throw ConfigError(fmt::format("{}: duplicate age {}", path.string(), age));
    }
  }
  return LifeTable(std::move(rates));
}

double LifeTable::rate(int age) const {
  auto it = rates_.find(age);
  if (it == rates_.end()) {
    throw ConfigError(fmt::format("life table has no entry for age {}", age));
  }
  return it->second;
}

std::vector<double> mortality_vector(const LifeTable& lt, int start_age, int n_t) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_t));
  for (int t = 0; t < n_t; ++t) out.push_back(rate_to_prob(lt.rate(start_age + t)));
  return out;
}

}  // namespace cstm
