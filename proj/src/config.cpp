#include "cstm/config.hpp"

#include "cstm/error.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cstm {

using json = nlohmann::ordered_json;

double ValueExpr::eval(const ParameterValues& params) const {
  double v = constant;
  for (const auto& [sign, name] : terms) {
    auto it = params.find(name);
    if (it == params.end()) throw ConfigError(fmt::format("unknown parameter '{}'", name));
    v += sign * it->second;
  }
  return v;
}

namespace {

json yaml_scalar(const YAML::Node& n) {
  const std::string& s = n.Scalar();
  if (n.Tag() == "!") return s;
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  std::int64_t i = 0;
  if (auto [p, ec] = std::from_chars(first, last, i); ec == std::errc() && p == last) return i;
  double d = 0.0;
  if (auto [p, ec] = std::from_chars(first, last, d); ec == std::errc() && p == last) return d;
  return s;
}

json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return yaml_scalar(n);
    case YAML::NodeType::Sequence: {
      json out = json::array();
      for (const auto& x : n) out.push_back(yaml_to_json(x));
      return out;
    }
    case YAML::NodeType::Map: {
      json out = json::object();
      for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (out.contains(key)) {
          throw ConfigError(fmt::format("line {}: duplicate key '{}'", kv.first.Mark().line + 1, key));
        }
        out[key] = yaml_to_json(kv.second);
      }
      return out;
    }
  }
  return nullptr;
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::string child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : fmt::format("{}.{}", path, key);
}

class Resolver {
 public:
  Resolver(const json& root, std::filesystem::path base_dir, const LoadOptions& options)
      : root_(root), base_dir_(std::move(base_dir)), options_(options) {}

  ModelConfig run();

 private:
  void issue(const std::string& path, std::string msg) {
    issues_.push_back(fmt::format("{}: {}", path.empty() ? "<root>" : path, msg));
  }

  void allowed_keys(const json& obj, const std::string& path,
                    std::initializer_list<std::string_view> keys) {
    for (const auto& [k, _] : obj.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        issue(child(path, k), "unknown key");
      }
    }
  }

  const json* object_at(const json& parent, std::string_view key, const std::string& path,
                        bool required) {
    auto it = parent.find(key);
    if (it == parent.end() || it->is_null()) {
      if (required) issue(child(path, key), "missing required section");
      return nullptr;
    }
    if (!it->is_object()) {
      issue(child(path, key), "expected a mapping");
      return nullptr;
    }
    return &*it;
  }

  std::optional<std::string> string_at(const json& v, const std::string& path) {
    if (!v.is_string()) {
      issue(path, "expected a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::optional<double> number_at(const json& v, const std::string& path) {
    if (!v.is_number()) {
      issue(path, "expected a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<std::int64_t> integer_at(const json& v, const std::string& path) {
    if (!v.is_number_integer()) {
      issue(path, "expected an integer");
      return std::nullopt;
    }
    return v.get<std::int64_t>();
  }

  bool is_state(const std::string& s) const { return states_.contains(s); }

  std::optional<std::string> state_at(const json& v, const std::string& path) {
    auto s = string_at(v, path);
    if (s && !is_state(*s)) {
      issue(path, fmt::format("unknown state '{}'", *s));
      return std::nullopt;
    }
    return s;
  }

  std::vector<std::string> state_list(const json& v, const std::string& path) {
    std::vector<std::string> out;
    if (!v.is_array() || v.empty()) {
      issue(path, "expected a non-empty list of states");
      return out;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (auto s = state_at(v[i], fmt::format("{}[{}]", path, i))) out.push_back(*s);
    }
    return out;
  }

  std::optional<ValueExpr> expr(const json& v, const std::string& path) {
    ValueExpr e;
    bool ok = true;
    auto term = [&](const json& x) {
      if (x.is_number()) {
        e.constant += x.get<double>();
        return;
      }
      if (x.is_string()) {
        std::string name = x.get<std::string>();
        double sign = 1.0;
        if (!name.empty() && name.front() == '-') {
          sign = -1.0;
          name.erase(0, 1);
        }
        if (!params_.contains(name)) {
          issue(path, fmt::format("unknown parameter '{}'", name));
          ok = false;
          return;
        }
        e.terms.emplace_back(sign, name);
        return;
      }
      issue(path, "expected a number, a parameter name or a list of them");
      ok = false;
    };
    if (v.is_array()) {
      if (v.empty()) {
        issue(path, "empty value list");
        return std::nullopt;
      }
      for (const auto& x : v) term(x);
    } else {
      term(v);
    }
    if (!ok) return std::nullopt;
    return e;
  }

  std::optional<MoveSpec> move(const json& v, const std::string& path) {
    if (!v.is_object()) {
      auto p = expr(v, path);
      if (!p) return std::nullopt;
      return MoveSpec{*p, std::nullopt, std::nullopt};
    }
    allowed_keys(v, path, {"probability", "odds_ratio", "hazard_ratio"});
    auto it = v.find("probability");
    if (it == v.end()) {
      issue(child(path, "probability"), "missing");
      return std::nullopt;
    }
    MoveSpec m;
    auto p = expr(*it, child(path, "probability"));
    if (!p) return std::nullopt;
    m.probability = *p;
    if (auto o = v.find("odds_ratio"); o != v.end()) m.odds_ratio = expr(*o, child(path, "odds_ratio"));
    if (auto h = v.find("hazard_ratio"); h != v.end()) {
      m.hazard_ratio = expr(*h, child(path, "hazard_ratio"));
    }
    return m;
  }

  MoveTable moves(const json& v, const std::string& path) {
    MoveTable out;
    if (!v.is_object()) {
      issue(path, "expected a mapping of origin states");
      return out;
    }
    for (const auto& [origin, row] : v.items()) {
      const auto opath = child(path, origin);
      if (!is_state(origin)) {
        issue(opath, fmt::format("unknown state '{}'", origin));
        continue;
      }
      if (absorbing_.contains(origin)) {
        issue(opath, "absorbing states have no outgoing transitions");
        continue;
      }
      if (!row.is_object()) {
        issue(opath, "expected a mapping of destination states");
        continue;
      }
      for (const auto& [dest, spec] : row.items()) {
        const auto dpath = child(opath, dest);
        if (!is_state(dest)) {
          issue(dpath, fmt::format("unknown state '{}'", dest));
          continue;
        }
        if (dest == origin) {
          issue(dpath, "staying is implied by the remainder of the row");
          continue;
        }
        if (dest == death_state_) {
          issue(dpath, "death is set by the mortality section");
          continue;
        }
        if (auto m = move(spec, dpath)) out[origin][dest] = *m;
      }
    }
    return out;
  }

  std::map<std::string, ValueExpr> state_values(const json& v, const std::string& path) {
    std::map<std::string, ValueExpr> out;
    if (!v.is_object()) {
      issue(path, "expected a mapping from state to value");
      return out;
    }
    for (const auto& [s, x] : v.items()) {
      if (!is_state(s)) {
        issue(child(path, s), fmt::format("unknown state '{}'", s));
        continue;
      }
      if (auto e = expr(x, child(path, s))) out[s] = *e;
    }
    for (const auto& s : order_) {
      if (!v.contains(s)) issue(child(path, s), "missing value for state");
    }
    return out;
  }

  std::vector<IncrementSpec> increments(const json& v, const std::string& path) {
    std::vector<IncrementSpec> out;
    if (!v.is_array()) {
      issue(path, "expected a list of transition rewards");
      return out;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto ipath = fmt::format("{}[{}]", path, i);
      const auto& x = v[i];
      if (!x.is_object()) {
        issue(ipath, "expected a mapping with from, to and value");
        continue;
      }
      allowed_keys(x, ipath, {"from", "to", "value"});
      if (!x.contains("from") || !x.contains("to") || !x.contains("value")) {
        issue(ipath, "needs from, to and value");
        continue;
      }
      IncrementSpec inc;
      inc.from = state_list(x["from"], child(ipath, "from"));
      auto to = state_at(x["to"], child(ipath, "to"));
      auto value = expr(x["value"], child(ipath, "value"));
      if (!to || !value || inc.from.empty()) continue;
      inc.to = *to;
      inc.value = *value;
      out.push_back(std::move(inc));
    }
    return out;
  }

  void reward_block(const json& parent, const std::string& path, std::vector<IncrementSpec>& costs,
                    std::vector<IncrementSpec>& utilities) {
    const auto* block = object_at(parent, "transition_rewards", path, false);
    if (!block) return;
    const auto bpath = child(path, "transition_rewards");
    allowed_keys(*block, bpath, {"costs", "utilities"});
    if (auto it = block->find("costs"); it != block->end()) costs = increments(*it, child(bpath, "costs"));
    if (auto it = block->find("utilities"); it != block->end()) {
      utilities = increments(*it, child(bpath, "utilities"));
    }
  }

  void states_section(ModelConfig& c);
  void parameters_section(ModelConfig& c);
  void mortality_section(ModelConfig& c);
  void tunnel_section(ModelConfig& c);
  void strategies_section(ModelConfig& c);
  void epi_section(ModelConfig& c);
  void psa_section(ModelConfig& c);
  std::optional<ParameterDistribution> distribution(const std::string& name, const json& v,
                                                    const std::string& path);

  const json& root_;
  std::filesystem::path base_dir_;
  LoadOptions options_;
  std::vector<std::string> issues_;
  std::vector<std::string> order_;
  std::set<std::string> states_;
  std::set<std::string> absorbing_;
  std::string death_state_;
  ParameterValues params_;
};

void Resolver::states_section(ModelConfig& c) {
  auto it = root_.find("states");
  if (it == root_.end() || !it->is_array() || it->size() < 2) {
    issue("states", "expected a list of at least two state names");
    return;
  }
  for (std::size_t i = 0; i < it->size(); ++i) {
    auto s = string_at((*it)[i], fmt::format("states[{}]", i));
    if (!s) continue;
    if (s->empty() || !states_.insert(*s).second) {
      issue(fmt::format("states[{}]", i), fmt::format("empty or duplicate state '{}'", *s));
      continue;
    }
    order_.push_back(*s);
  }
  c.states = order_;
  if (auto a = root_.find("absorbing"); a != root_.end()) {
    if (!a->is_array()) {
      issue("absorbing", "expected a list of states");
    } else {
      for (std::size_t i = 0; i < a->size(); ++i) {
        if (auto s = state_at((*a)[i], fmt::format("absorbing[{}]", i))) {
          absorbing_.insert(*s);
          c.absorbing.push_back(*s);
        }
      }
    }
  }

  if (const auto* init = object_at(root_, "initial", "", true)) {
    double total = 0.0;
    for (const auto& [s, v] : init->items()) {
      const auto path = child("initial", s);
      if (!is_state(s)) {
        issue(path, fmt::format("unknown state '{}'", s));
        continue;
      }
      auto x = number_at(v, path);
      if (!x) continue;
      if (*x < 0.0 || *x > 1.0) issue(path, "initial share must be in [0, 1]");
      c.initial[s] = *x;
      total += *x;
    }
    if (std::abs(total - 1.0) > 1e-12) issue("initial", fmt::format("shares sum to {}, not 1", total));
  }

  if (auto cy = root_.find("cycles"); cy == root_.end()) {
    issue("cycles", "missing");
  } else if (auto n = integer_at(*cy, "cycles")) {
    if (*n < 1) issue("cycles", "must be at least 1");
    c.cycles = static_cast<int>(*n);
  }
  if (auto a = root_.find("start_age"); a != root_.end()) {
    if (auto n = integer_at(*a, "start_age")) c.start_age = static_cast<int>(*n);
  }
  if (auto h = root_.find("half_cycle"); h != root_.end()) {
    if (h->is_boolean()) {
      c.half_cycle = h->get<bool>();
    } else {
      issue("half_cycle", "expected true or false");
    }
  }
  if (auto n = root_.find("name"); n != root_.end()) {
    if (auto s = string_at(*n, "name")) c.name = *s;
  }
}

void Resolver::parameters_section(ModelConfig& c) {
  const auto* p = object_at(root_, "parameters", "", false);
  if (!p) return;
  for (const auto& [name, v] : p->items()) {
    if (auto x = number_at(v, child("parameters", name))) params_[name] = *x;
  }
  c.parameters = params_;
}

void Resolver::mortality_section(ModelConfig& c) {
  const auto* m = object_at(root_, "mortality", "", false);
  if (!m) return;
  allowed_keys(*m, "mortality",
               {"death_state", "probability", "life_table", "life_table_values", "hazard_ratios"});
  auto& spec = c.mortality;
  if (auto d = m->find("death_state"); d == m->end()) {
    issue("mortality.death_state", "missing");
  } else if (auto s = state_at(*d, "mortality.death_state")) {
    if (!absorbing_.contains(*s)) issue("mortality.death_state", "death state must be absorbing");
    spec.death_state = death_state_ = *s;
  }
  const auto prob = m->find("probability");
  const auto table = m->find("life_table");
  const bool has_prob = prob != m->end() && !prob->is_null();
  const bool has_table = table != m->end() && !table->is_null();
  if (has_prob == has_table) {
    issue("mortality", "set exactly one of probability or life_table");
  }
  if (has_prob) spec.probability = expr(*prob, "mortality.probability");
  if (auto v = m->find("life_table_values"); v != m->end()) {
    auto s = string_at(*v, "mortality.life_table_values");
    if (s && *s != "rates" && *s != "probabilities") {
      issue("mortality.life_table_values", "expected 'rates' or 'probabilities'");
    }
    spec.life_table_probabilities = s && *s == "probabilities";
  }
  if (has_table && !has_prob) {
    std::filesystem::path path;
    if (options_.life_table) {
      path = *options_.life_table;
    } else if (auto s = string_at(*table, "mortality.life_table")) {
      path = std::filesystem::path(*s);
      if (path.is_relative()) path = base_dir_ / path;
    }
    if (!path.empty()) {
      spec.life_table = path;
      try {
        c.life_table = LifeTable::load(path, spec.life_table_probabilities);
        const int last = c.start_age + c.cycles - 1;
        if (c.life_table->min_age() > c.start_age || c.life_table->max_age() < last) {
          issue("mortality.life_table",
                fmt::format("{} covers ages {}..{} but the model needs {}..{}", path.string(),
                            c.life_table->min_age(), c.life_table->max_age(), c.start_age, last));
        }
      } catch (const Error& e) {
        issue("mortality.life_table", e.what());
      }
    }
  }
  if (auto h = m->find("hazard_ratios"); h != m->end()) {
    if (!h->is_object()) {
      issue("mortality.hazard_ratios", "expected a mapping from state to ratio");
    } else {
      for (const auto& [s, v] : h->items()) {
        const auto path = child("mortality.hazard_ratios", s);
        if (!is_state(s)) {
          issue(path, fmt::format("unknown state '{}'", s));
          continue;
        }
        if (auto e = expr(v, path)) spec.hazard_ratios[s] = *e;
      }
    }
  }
}

void Resolver::tunnel_section(ModelConfig& c) {
  const auto* t = object_at(root_, "tunnel", "", false);
  if (!t) return;
  allowed_keys(*t, "tunnel", {"state", "to", "length", "weibull", "probabilities"});
  TunnelConfig tc;
  bool ok = true;
  auto need = [&](std::string_view key) -> const json* {
    auto it = t->find(key);
    if (it == t->end()) {
      issue(child("tunnel", key), "missing");
      ok = false;
      return nullptr;
    }
    return &*it;
  };
  if (const auto* s = need("state")) {
    if (auto v = state_at(*s, "tunnel.state")) {
      tc.state = *v;
      if (absorbing_.contains(*v)) {
        issue("tunnel.state", "cannot expand an absorbing state");
        ok = false;
      }
    } else {
      ok = false;
    }
  }
  if (const auto* s = need("to")) {
    if (auto v = state_at(*s, "tunnel.to")) {
      tc.to = *v;
    } else {
      ok = false;
    }
  }
  if (const auto* s = need("length")) {
    auto n = integer_at(*s, "tunnel.length");
    if (!n || *n < 1) {
      if (n) issue("tunnel.length", "must be at least 1");
      ok = false;
    } else {
      tc.length = static_cast<int>(*n);
    }
  }
  const auto w = t->find("weibull");
  const auto p = t->find("probabilities");
  if ((w == t->end()) == (p == t->end())) {
    issue("tunnel", "set exactly one of weibull or probabilities");
    ok = false;
  } else if (w != t->end()) {
    if (!w->is_object() || !w->contains("scale") || !w->contains("shape")) {
      issue("tunnel.weibull", "needs scale and shape");
      ok = false;
    } else {
      allowed_keys(*w, "tunnel.weibull", {"scale", "shape"});
      auto scale = expr((*w)["scale"], "tunnel.weibull.scale");
      auto shape = expr((*w)["shape"], "tunnel.weibull.shape");
      if (scale && shape) {
        tc.weibull = std::make_pair(*scale, *shape);
      } else {
        ok = false;
      }
    }
  } else {
    if (!p->is_array()) {
      issue("tunnel.probabilities", "expected a list");
      ok = false;
    } else {
      for (std::size_t i = 0; i < p->size(); ++i) {
        if (auto e = expr((*p)[i], fmt::format("tunnel.probabilities[{}]", i))) {
          tc.probabilities.push_back(*e);
        } else {
          ok = false;
        }
      }
      if (ok && static_cast<int>(tc.probabilities.size()) != tc.length) {
        issue("tunnel.probabilities", fmt::format("has {} entries but length is {}",
                                                  tc.probabilities.size(), tc.length));
        ok = false;
      }
    }
  }
  if (ok) c.tunnel = std::move(tc);
}

void Resolver::strategies_section(ModelConfig& c) {
  const auto* s = object_at(root_, "strategies", "", true);
  if (!s) return;
  if (s->empty()) issue("strategies", "at least one strategy is required");
  for (const auto& [label, v] : s->items()) {
    const auto path = child("strategies", label);
    if (!v.is_object()) {
      issue(path, "expected a mapping");
      continue;
    }
    allowed_keys(v, path, {"transitions", "costs", "utilities", "transition_rewards"});
    StrategyConfig sc;
    sc.label = label;
    if (auto t = v.find("transitions"); t != v.end()) sc.transitions = moves(*t, child(path, "transitions"));
    for (auto [key, target] : {std::pair{"costs", &sc.costs}, std::pair{"utilities", &sc.utilities}}) {
      if (auto it = v.find(key); it != v.end()) {
        *target = state_values(*it, child(path, key));
      } else {
        issue(child(path, key), "missing");
      }
    }
    reward_block(v, path, sc.cost_increments, sc.utility_increments);
    c.strategies.push_back(std::move(sc));
  }
}

void Resolver::epi_section(ModelConfig& c) {
  const auto* e = object_at(root_, "epi", "", false);
  if (!e) {
    for (const auto& s : order_) {
      if (!absorbing_.contains(s)) c.epi.prevalence.push_back({s});
    }
    return;
  }
  allowed_keys(*e, "epi", {"prevalence", "proportions"});
  if (auto p = e->find("prevalence"); p != e->end()) {
    if (!p->is_array()) {
      issue("epi.prevalence", "expected a list of state lists");
    } else {
      for (std::size_t i = 0; i < p->size(); ++i) {
        auto states = state_list((*p)[i], fmt::format("epi.prevalence[{}]", i));
        for (const auto& st : states) {
          if (st == death_state_) issue(fmt::format("epi.prevalence[{}]", i), "includes the death state");
        }
        if (!states.empty()) c.epi.prevalence.push_back(std::move(states));
      }
    }
  }
  if (auto p = e->find("proportions"); p != e->end()) {
    if (!p->is_array()) {
      issue("epi.proportions", "expected a list");
    } else {
      for (std::size_t i = 0; i < p->size(); ++i) {
        const auto path = fmt::format("epi.proportions[{}]", i);
        const auto& x = (*p)[i];
        if (!x.is_object() || !x.contains("numerator") || !x.contains("denominator")) {
          issue(path, "needs numerator and denominator");
          continue;
        }
        ProportionSpec ps{state_list(x["numerator"], child(path, "numerator")),
                          state_list(x["denominator"], child(path, "denominator"))};
        for (const auto& st : ps.numerator) {
          if (std::find(ps.denominator.begin(), ps.denominator.end(), st) == ps.denominator.end()) {
            issue(child(path, "numerator"), fmt::format("state '{}' is not in the denominator", st));
          }
        }
        c.epi.proportions.push_back(std::move(ps));
      }
    }
  }
}

std::optional<ParameterDistribution> Resolver::distribution(const std::string& name, const json& v,
                                                            const std::string& path) {
  if (!v.is_object() || !v.contains("family")) {
    issue(path, "expected a mapping with a family");
    return std::nullopt;
  }
  auto fam_name = string_at(v["family"], child(path, "family"));
  if (!fam_name) return std::nullopt;
  Family family;
  try {
    family = family_from_string(*fam_name);
  } catch (const ConfigError& e) {
    issue(child(path, "family"), e.what());
    return std::nullopt;
  }
  auto num = [&](std::string_view key) -> std::optional<double> {
    auto it = v.find(key);
    if (it == v.end()) return std::nullopt;
    return number_at(*it, child(path, key));
  };
  auto has = [&](std::string_view key) { return v.contains(key); };
  std::optional<ParameterDistribution> d;
  try {
    switch (family) {
      case Family::fixed:
        allowed_keys(v, path, {"family", "value", "support"});
        if (auto x = num("value")) d = ParameterDistribution::fixed(name, *x);
        break;
      case Family::beta:
        allowed_keys(v, path, {"family", "alpha", "beta", "mean", "sd", "support"});
        if (has("alpha") || has("beta")) {
          auto a = num("alpha");
          auto b = num("beta");
          if (a && b) d = ParameterDistribution{name, family, *a, *b, Support::probability};
        } else if (auto m = num("mean"), s = num("sd"); m && s) {
          d = ParameterDistribution::beta_mean_sd(name, *m, *s);
        }
        break;
      case Family::gamma:
        allowed_keys(v, path, {"family", "shape", "scale", "mean", "sd", "support"});
        if (has("shape") || has("scale")) {
          auto a = num("shape");
          auto b = num("scale");
          if (a && b) d = ParameterDistribution{name, family, *a, *b, Support::nonnegative};
        } else if (auto m = num("mean"), s = num("sd"); m && s) {
          d = ParameterDistribution::gamma_mean_sd(name, *m, *s);
        }
        break;
      case Family::lognormal:
        allowed_keys(v, path, {"family", "meanlog", "sdlog", "mean", "sd", "support"});
        if (has("meanlog") || has("sdlog")) {
          auto a = num("meanlog");
          auto b = num("sdlog");
          if (a && b) d = ParameterDistribution{name, family, *a, *b, Support::positive};
        } else if (auto m = num("mean"), s = num("sd"); m && s) {
          d = ParameterDistribution::lognormal_mean_sd(name, *m, *s);
        }
        break;
      case Family::normal:
        allowed_keys(v, path, {"family", "mean", "sd", "support"});
        if (auto m = num("mean"), s = num("sd"); m && s) {
          d = ParameterDistribution{name, family, *m, *s, Support::real};
        }
        break;
      case Family::uniform:
        allowed_keys(v, path, {"family", "min", "max", "support"});
        if (auto a = num("min"), b = num("max"); a && b) {
          d = ParameterDistribution{name, family, *a, *b, Support::real};
        }
        break;
    }
    if (!d) {
      issue(path, fmt::format("incomplete parameters for the {} family", *fam_name));
      return std::nullopt;
    }
    if (auto s = v.find("support"); s != v.end()) {
      auto sname = string_at(*s, child(path, "support"));
      if (sname == "real") d->support = Support::real;
      else if (sname == "nonnegative") d->support = Support::nonnegative;
      else if (sname == "positive") d->support = Support::positive;
      else if (sname == "probability") d->support = Support::probability;
      else if (sname) issue(child(path, "support"), fmt::format("unknown support '{}'", *sname));
    }
    d->validate();
  } catch (const DomainError& e) {
    issue(path, e.what());
    return std::nullopt;
  }
  return d;
}

void Resolver::psa_section(ModelConfig& c) {
  const auto* p = object_at(root_, "psa", "", false);
  if (!p) return;
  allowed_keys(*p, "psa", {"n_sim", "seed", "wtp", "distributions"});
  if (auto it = p->find("n_sim"); it != p->end()) {
    if (auto n = integer_at(*it, "psa.n_sim")) {
      if (*n < 1) issue("psa.n_sim", "must be at least 1");
      else c.psa.n_sim = static_cast<std::size_t>(*n);
    }
  }
  if (auto it = p->find("seed"); it != p->end()) {
    if (auto n = integer_at(*it, "psa.seed")) c.psa.seed = static_cast<std::uint64_t>(*n);
  }
  if (const auto* w = object_at(*p, "wtp", "psa", false)) {
    allowed_keys(*w, "psa.wtp", {"max", "step"});
    if (auto it = w->find("max"); it != w->end()) {
      if (auto x = number_at(*it, "psa.wtp.max")) c.psa.wtp_max = *x;
    }
    if (auto it = w->find("step"); it != w->end()) {
      if (auto x = number_at(*it, "psa.wtp.step")) c.psa.wtp_step = *x;
    }
    if (!(c.psa.wtp_max >= 0.0) || !(c.psa.wtp_step > 0.0)) issue("psa.wtp", "needs max >= 0 and step > 0");
  }
  if (const auto* d = object_at(*p, "distributions", "psa", false)) {
    for (const auto& [name, v] : d->items()) {
      const auto path = child("psa.distributions", name);
      if (!params_.contains(name)) {
        issue(path, fmt::format("unknown parameter '{}'", name));
        continue;
      }
      if (auto dist = distribution(name, v, path)) c.psa.distributions.push_back(std::move(*dist));
    }
  }
}

ModelConfig Resolver::run() {
  ModelConfig c;
  if (!root_.is_object()) throw ConfigError("configuration root must be a mapping");
  allowed_keys(root_, "",
               {"name", "states", "absorbing", "initial", "cycles", "start_age", "half_cycle",
                "discount", "parameters", "mortality", "transitions", "transition_rewards",
                "tunnel", "strategies", "epi", "psa"});
  states_section(c);
  parameters_section(c);
  mortality_section(c);
  if (auto t = root_.find("transitions"); t != root_.end()) c.transitions = moves(*t, "transitions");
  reward_block(root_, "", c.cost_increments, c.utility_increments);
  tunnel_section(c);
  strategies_section(c);
  epi_section(c);
  psa_section(c);
  if (const auto* d = object_at(root_, "discount", "", false)) {
    allowed_keys(*d, "discount", {"costs", "effects"});
    if (auto it = d->find("costs"); it != d->end()) {
      if (auto e = expr(*it, "discount.costs")) c.cost_discount = *e;
    }
    if (auto it = d->find("effects"); it != d->end()) {
      if (auto e = expr(*it, "discount.effects")) c.effect_discount = *e;
    }
  }
  if (!issues_.empty()) {
    std::string msg = fmt::format("{} configuration problem{}:", issues_.size(),
                                  issues_.size() == 1 ? "" : "s");
    for (const auto& i : issues_) msg += "\n  " + i;
    throw ConfigError(msg);
  }
  return c;
}

Matrix build_matrix(const ModelConfig& c, const StateSpace& space, const MoveTable& moves,
                    const ParameterValues& params, std::optional<double> mortality_rate) {
  const auto n = static_cast<Eigen::Index>(space.size());
  Matrix P = Matrix::Zero(n, n);
  const bool has_death = !c.mortality.death_state.empty();
  const auto d = has_death ? static_cast<Eigen::Index>(space.index_of(c.mortality.death_state)) : 0;
  double background_p = 0.0;
  double background_r = 0.0;
  if (has_death) {
    if (mortality_rate) {
      background_r = *mortality_rate;
      background_p = rate_to_prob(background_r);
    } else {
      background_p = c.mortality.probability->eval(params);
      background_r = prob_to_rate(background_p);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& name = space.names()[static_cast<std::size_t>(i)];
    if (space.is_absorbing(static_cast<std::size_t>(i))) {
      P(i, i) = 1.0;
      continue;
    }
    double p_death = 0.0;
    if (has_death) {
      auto hr = c.mortality.hazard_ratios.find(name);
      p_death = hr == c.mortality.hazard_ratios.end()
                    ? background_p
                    : rate_to_prob(background_r * hr->second.eval(params));
    }
    double moved = 0.0;
    if (auto row = moves.find(name); row != moves.end()) {
      for (Eigen::Index j = 0; j < n; ++j) {
        auto m = row->second.find(space.names()[static_cast<std::size_t>(j)]);
        if (m == row->second.end()) continue;
        double p = m->second.probability.eval(params);
        if (m->second.hazard_ratio) p = apply_hazard_ratio(p, m->second.hazard_ratio->eval(params));
        if (m->second.odds_ratio) p = apply_odds_ratio(p, m->second.odds_ratio->eval(params));
        P(i, j) = (1.0 - p_death) * p;
        moved += p;
      }
    }
    P(i, i) = (1.0 - p_death) * (1.0 - moved);
    if (has_death) P(i, d) = p_death;
  }
  return P;
}

std::vector<TransitionIncrement> resolve_increments(const std::vector<IncrementSpec>& specs,
                                                    const ParameterValues& params) {
  std::vector<TransitionIncrement> out;
  for (const auto& s : specs) out.push_back({s.from, s.to, s.value.eval(params)});
  return out;
}

std::vector<double> resolve_state_values(const std::map<std::string, ValueExpr>& v,
                                         const StateSpace& space, const ParameterValues& params) {
  std::vector<double> out;
  for (const auto& s : space.names()) out.push_back(v.at(s).eval(params));
  return out;
}

ParameterValues layered(const ModelConfig& c, const ParameterValues& overrides) {
  ParameterValues p = c.parameters;
  for (const auto& [k, v] : overrides) {
    auto it = p.find(k);
    if (it == p.end()) throw ConfigError(fmt::format("unknown parameter '{}'", k));
    it->second = v;
  }
  return p;
}

}  // namespace

nlohmann::ordered_json parse_config_text(const std::string& text, bool is_json, const std::string& source) {
  if (is_json) {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
      throw ConfigError(fmt::format("{}:{}:{}: JSON parse error: {}", source, line, col, e.what()));
    }
  }
  YAML::Node node;
  try {
    node = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}:{}:{}: YAML parse error: {}", source, e.mark.line + 1,
                                  e.mark.column + 1, e.msg));
  }
  if (!node.IsDefined() || node.IsNull()) throw ConfigError(fmt::format("{}: empty configuration", source));
  try {
    return yaml_to_json(node);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}:{}", source, e.what()));
  }
}

nlohmann::ordered_json read_config_tree(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open configuration '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.extension() == ".json", path.string());
}

ModelConfig resolve_config(const nlohmann::ordered_json& tree, const std::filesystem::path& base_dir,
                           const LoadOptions& options) {
  if (!tree.is_object()) throw ConfigError("configuration root must be a mapping");
  json doc = tree;
  std::vector<std::string> names;
  std::string variant;
  json variants = doc.contains("variants") ? doc["variants"] : json::object();
  if (!variants.is_object()) throw ConfigError("variants: expected a mapping");
  for (const auto& [k, _] : variants.items()) names.push_back(k);
  if (options.variant) {
    variant = *options.variant;
  } else if (auto d = doc.find("default_variant"); d != doc.end()) {
    if (!d->is_string()) throw ConfigError("default_variant: expected a string");
    variant = d->get<std::string>();
  }
  doc.erase("variants");
  doc.erase("default_variant");
  if (!variant.empty()) {
    if (!variants.contains(variant)) {
      std::string known;
      for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
      throw ConfigError(fmt::format("unknown variant '{}' (available: {})", variant,
                                    known.empty() ? "none" : known));
    }
    doc.merge_patch(variants[variant]);
  }
  ModelConfig c = Resolver(doc, base_dir, options).run();
  c.variant = variant;
  c.variants = names;
  build_models(c);
  return c;
}

ModelConfig load_config(const std::filesystem::path& path, const LoadOptions& options) {
  const auto tree = read_config_tree(path);
  auto c = resolve_config(tree, path.parent_path(), options);
  if (c.name.empty()) c.name = path.stem().string();
  return c;
}

std::vector<StrategyModel> build_models(const ModelConfig& c, const ParameterValues& overrides) {
  const auto params = layered(c, overrides);
  const StateSpace space(c.states, c.absorbing);
  RowVector init = RowVector::Zero(static_cast<Eigen::Index>(space.size()));
  for (const auto& [s, v] : c.initial) init(static_cast<Eigen::Index>(space.index_of(s))) = v;

  std::vector<StrategyModel> out;
  for (const auto& sc : c.strategies) {
    MoveTable moves = c.transitions;
    for (const auto& [origin, row] : sc.transitions) {
      for (const auto& [dest, m] : row) moves[origin][dest] = m;
    }
    std::optional<TransitionModel> tm;
    if (c.life_table) {
      std::vector<Matrix> blocks;
      blocks.reserve(static_cast<std::size_t>(c.cycles));
      for (int t = 0; t < c.cycles; ++t) {
        blocks.push_back(build_matrix(c, space, moves, params, c.life_table->rate(c.start_age + t)));
      }
      tm = TransitionModel::time_varying(std::move(blocks));
    } else {
      tm = TransitionModel::constant(build_matrix(c, space, moves, params, std::nullopt), c.cycles);
    }
    try {
      require_valid(space, *tm);
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("strategy '{}': {}", sc.label, e.what()));
    }

    auto cost_inc = resolve_increments(c.cost_increments, params);
    auto util_inc = resolve_increments(c.utility_increments, params);
    for (auto& x : resolve_increments(sc.cost_increments, params)) cost_inc.push_back(std::move(x));
    for (auto& x : resolve_increments(sc.utility_increments, params)) util_inc.push_back(std::move(x));

    StrategyModel model{sc.label,
                        space,
                        StateVector(init),
                        std::move(*tm),
                        StateRewards(resolve_state_values(sc.costs, space, params)),
                        StateRewards(resolve_state_values(sc.utilities, space, params)),
                        std::move(cost_inc),
                        std::move(util_inc),
                        std::nullopt,
                        std::nullopt};

    if (c.tunnel) {
      const auto& t = *c.tunnel;
      std::vector<double> exits;
      if (t.weibull) {
        exits = weibull_progression(t.weibull->first.eval(params), t.weibull->second.eval(params),
                                    t.length);
      } else {
        for (const auto& e : t.probabilities) exits.push_back(e.eval(params));
      }
      if (auto row = moves.find(t.state); row != moves.end()) {
        if (auto m = row->second.find(t.to); m != row->second.end()) {
          for (auto& e : exits) {
            if (m->second.hazard_ratio) e = apply_hazard_ratio(e, m->second.hazard_ratio->eval(params));
            if (m->second.odds_ratio) e = apply_odds_ratio(e, m->second.odds_ratio->eval(params));
          }
        }
      }
      model = with_tunnel(model, TunnelSpec{t.state, t.to, std::move(exits)});
    }
    out.push_back(std::move(model));
  }
  return out;
}

AnalysisSettings analysis_settings(const ModelConfig& c, const ParameterValues& overrides) {
  const auto params = layered(c, overrides);
  return AnalysisSettings{c.cost_discount.eval(params), c.effect_discount.eval(params), c.half_cycle};
}

}  // namespace cstm
