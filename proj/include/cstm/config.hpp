#pragma once

#include "cstm/analysis.hpp"
#include "cstm/psa.hpp"
#include "cstm/transforms.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cstm {

// Sum of signed parameter references plus a constant.
struct ValueExpr {
  double constant = 0.0;
  std::vector<std::pair<double, std::string>> terms;  // (sign, parameter)

  double eval(const ParameterValues& params) const;
  static ValueExpr number(double v) { return {v, {}}; }
};

// A survival-conditional move probability with optional modifiers.
struct MoveSpec {
  ValueExpr probability;
  std::optional<ValueExpr> odds_ratio;
  std::optional<ValueExpr> hazard_ratio;
};

// origin -> destination -> move
using MoveTable = std::map<std::string, std::map<std::string, MoveSpec>>;

struct MortalitySpec {
  std::string death_state;
  std::optional<ValueExpr> probability;
  std::optional<std::filesystem::path> life_table;
  bool life_table_probabilities = false;
  std::map<std::string, ValueExpr> hazard_ratios;
};

struct TunnelConfig {
  std::string state;
  std::string to;
  int length = 1;
  std::optional<std::pair<ValueExpr, ValueExpr>> weibull;  // (scale, shape)
  std::vector<ValueExpr> probabilities;                    // explicit per-tau list
};

struct IncrementSpec {
  std::vector<std::string> from;
  std::string to;
  ValueExpr value;
};

struct StrategyConfig {
  std::string label;
  MoveTable transitions;  // overrides of the shared table
  std::map<std::string, ValueExpr> costs;
  std::map<std::string, ValueExpr> utilities;
  std::vector<IncrementSpec> cost_increments;
  std::vector<IncrementSpec> utility_increments;
};

struct ProportionSpec {
  std::vector<std::string> numerator;
  std::vector<std::string> denominator;
};

struct EpiConfig {
  std::vector<std::vector<std::string>> prevalence;
  std::vector<ProportionSpec> proportions;
};

struct PsaConfig {
  std::vector<ParameterDistribution> distributions;
  std::size_t n_sim = 1000;
  std::uint64_t seed = 1;
  double wtp_max = 200000.0;
  double wtp_step = 5000.0;
};

struct ModelConfig {
  std::string name;
  std::string variant;                 // empty when the file defines none
  std::vector<std::string> variants;   // all variant names in the file
  std::vector<std::string> states;
  std::vector<std::string> absorbing;
  std::map<std::string, double> initial;
  int cycles = 0;
  int start_age = 0;
  bool half_cycle = true;
  ValueExpr cost_discount;
  ValueExpr effect_discount;
  ParameterValues parameters;
  MortalitySpec mortality;
  std::optional<LifeTable> life_table;
  MoveTable transitions;
  std::optional<TunnelConfig> tunnel;
  std::vector<IncrementSpec> cost_increments;
  std::vector<IncrementSpec> utility_increments;
  std::vector<StrategyConfig> strategies;
  EpiConfig epi;
  PsaConfig psa;
};

struct LoadOptions {
  std::optional<std::string> variant;                  // default_variant when unset
  std::optional<std::filesystem::path> life_table;     // replaces the file's table
};

// Parses YAML (or JSON for a .json extension) into a JSON tree. Throws
// ConfigError with line and column on syntax errors.
nlohmann::ordered_json read_config_tree(const std::filesystem::path& path);
nlohmann::ordered_json parse_config_text(const std::string& text, bool json, const std::string& source);

// Resolves a config tree. Relative file references are taken from
// `base_dir`. Every problem found is reported in one ConfigError, one line
// per problem prefixed by its field path.
ModelConfig resolve_config(const nlohmann::ordered_json& tree, const std::filesystem::path& base_dir,
                           const LoadOptions& options = {});

ModelConfig load_config(const std::filesystem::path& path, const LoadOptions& options = {});

// Builds every strategy with `overrides` layered over the file's parameters.
std::vector<StrategyModel> build_models(const ModelConfig& config,
                                        const ParameterValues& overrides = {});

AnalysisSettings analysis_settings(const ModelConfig& config, const ParameterValues& overrides = {});

}  // namespace cstm
