#include "cstm/config.hpp"
#include "cstm/error.hpp"
#include "cstm/model_io.hpp"
#include "cstm/report.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <fmt/format.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumeric = 4;

struct Options {
  std::string model = "sick-sicker";
  std::string variant;
  std::string life_table;
  std::string out;
  std::string format = "csv";
  std::string totals;
  std::string strategy;
  std::size_t n_sim = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double wtp_max = -1.0;
  double wtp_step = -1.0;
  unsigned threads = 0;
  int rows = 10;
  bool export_model = false;
  bool fixed_params = false;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw cstm::ConfigError(fmt::format("cannot open '{}'", p.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

fs::path data_dir() {
  if (const char* env = std::getenv("CSTM_DATA_DIR")) return env;
  return CSTM_DATA_DIR;
}

fs::path resolve_model(const std::string& model) {
  fs::path p(model);
  if (fs::exists(p)) return p;
  std::string stem = model;
  std::replace(stem.begin(), stem.end(), '-', '_');
  for (const char* ext : {".yaml", ".yml", ".json"}) {
    auto candidate = data_dir() / (stem + ext);
    if (fs::exists(candidate)) return candidate;
  }
  throw cstm::ConfigError(fmt::format("no model file or bundled model named '{}'", model));
}

fs::path output_dir(const Options& o) {
  fs::path dir = !o.out.empty() ? fs::path(o.out)
                 : std::getenv("CSTM_OUT_DIR") ? fs::path(std::getenv("CSTM_OUT_DIR"))
                                               : fs::path("cstm-out");
  fs::create_directories(dir);
  return dir;
}

cstm::TableFormat table_format(const Options& o) {
  return o.format == "json" ? cstm::TableFormat::json : cstm::TableFormat::csv;
}

struct Loaded {
  fs::path path;
  cstm::ModelConfig config;
  std::uint64_t hash = 0;
};

Loaded load(const Options& o) {
  Loaded l;
  l.path = resolve_model(o.model);
  cstm::LoadOptions lo;
  if (!o.variant.empty()) lo.variant = o.variant;
  if (!o.life_table.empty()) lo.life_table = fs::path(o.life_table);
  l.config = cstm::load_config(l.path, lo);
  l.hash = fnv1a(read_file(l.path));
  if (l.config.mortality.life_table) l.hash = fnv1a(read_file(*l.config.mortality.life_table), l.hash);
  return l;
}

void write_manifest(const fs::path& dir, const std::string& command, const Loaded* l,
                    const std::vector<std::string>& files, const json& extra) {
  json m;
  m["tool"] = "cstm";
  m["version"] = CSTM_VERSION;
  m["command"] = command;
  if (l) {
    m["model"] = l->config.name;
    m["config_file"] = l->path.filename().string();
    m["variant"] = l->config.variant;
    if (l->config.mortality.life_table) m["life_table"] = l->config.mortality.life_table->filename().string();
    m["config_hash"] = fmt::format("fnv1a64:{:016x}", l->hash);
  }
  for (const auto& [k, v] : extra.items()) m[k] = v;
  m["files"] = files;
  m["libraries"] = {{"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
                                          EIGEN_MINOR_VERSION)},
                    {"fmt", fmt::format("{}", FMT_VERSION)},
                    {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR,
                                                  NLOHMANN_JSON_VERSION_MINOR,
                                                  NLOHMANN_JSON_VERSION_PATCH)}};
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << m.dump(2) << '\n';
}

cstm::AnalysisReport analyse(const Loaded& l) {
  return cstm::run_analysis(cstm::build_models(l.config), cstm::analysis_settings(l.config));
}

int cmd_trace(const Options& o) {
  const auto l = load(o);
  const auto models = cstm::build_models(l.config);
  const auto report = cstm::run_analysis(models, cstm::analysis_settings(l.config));
  const auto dir = output_dir(o);
  std::vector<std::string> files;
  for (const auto& r : report.strategies) {
    files.push_back(cstm::write_table(dir, "trace_" + r.label, cstm::trace_table(r), table_format(o)));
  }
  if (o.export_model) {
    for (const auto& m : models) {
      if (table_format(o) == cstm::TableFormat::csv) {
        const auto name = "model_" + m.label + ".csv";
        cstm::write_csv(dir / name, cstm::transition_model_table(m.space, m.model));
        files.push_back(name);
      } else {
        const auto name = "model_" + m.label + ".json";
        std::ofstream out(dir / name, std::ios::binary);
        out << cstm::transition_model_json(m.space, m.model).dump(2) << '\n';
        files.push_back(name);
      }
    }
  }
  write_manifest(dir, "trace", &l, files, json::object());
  const auto& shown = o.strategy.empty() ? report.strategies.front() : report.strategy(o.strategy);
  std::cout << fmt::format("Cohort trace, {} ({} variant)\n", shown.label, l.config.variant)
            << cstm::render_trace(shown, o.rows);
  return 0;
}

int cmd_epi(const Options& o) {
  const auto l = load(o);
  const auto report = analyse(l);
  const auto& death = l.config.mortality.death_state;
  const std::vector<std::string> deaths = death.empty() ? l.config.absorbing : std::vector{death};
  std::vector<std::pair<std::string, std::vector<cstm::EpiSeries>>> all;
  std::string summary;
  for (const auto& r : report.strategies) {
    std::vector<cstm::EpiSeries> series{cstm::survival(r.trace, r.space, deaths)};
    for (const auto& p : l.config.epi.prevalence) series.push_back(cstm::prevalence(r.trace, r.space, p, deaths));
    for (const auto& p : l.config.epi.proportions) {
      series.push_back(cstm::proportion_among(r.trace, r.space, p.numerator, p.denominator));
    }
    summary += fmt::format("{:<10} {:>8}\n", r.label, cstm::format_fixed(cstm::life_expectancy(series.front()), 3));
    all.emplace_back(r.label, std::move(series));
  }
  const auto dir = output_dir(o);
  std::vector<std::string> files{cstm::write_table(dir, "epi", cstm::epi_table(all), table_format(o))};
  write_manifest(dir, "epi", &l, files, json::object());
  std::cout << "Life expectancy (cycles)\n" << summary;
  return 0;
}

int cmd_cea(const Options& o) {
  const auto dir = output_dir(o);
  if (!o.totals.empty()) {
    const auto outcomes = cstm::read_totals(cstm::read_delimited(fs::path(o.totals)));
    const auto cea = cstm::calculate_icers(outcomes);
    std::vector<std::string> files{cstm::write_table(dir, "cea", cstm::cea_table(cea), table_format(o))};
    json extra{{"totals_file", fs::path(o.totals).filename().string()},
               {"totals_hash", fmt::format("fnv1a64:{:016x}", fnv1a(read_file(o.totals)))}};
    write_manifest(dir, "cea", nullptr, files, extra);
    std::cout << cstm::render_cea(cea);
    return 0;
  }
  const auto l = load(o);
  const auto report = analyse(l);
  std::vector<std::string> files{
      cstm::write_table(dir, "totals", cstm::totals_table(report), table_format(o)),
      cstm::write_table(dir, "cea", cstm::cea_table(report.cea), table_format(o)),
      cstm::write_table(dir, "cea_state", cstm::cea_table(report.cea_state), table_format(o))};
  write_manifest(dir, "cea", &l, files, json::object());
  std::cout << "Expected discounted outcomes\n"
            << cstm::render_totals(report) << "\nCost-effectiveness (state and transition rewards)\n"
            << cstm::render_cea(report.cea);
  return 0;
}

int cmd_psa(const Options& o) {
  const auto l = load(o);
  const auto& pc = l.config.psa;
  const std::size_t n_sim = o.n_sim > 0 ? o.n_sim : pc.n_sim;
  const std::uint64_t seed = o.seed_set ? o.seed : pc.seed;
  const double wtp_max = o.wtp_max >= 0.0 ? o.wtp_max : pc.wtp_max;
  const double wtp_step = o.wtp_step > 0.0 ? o.wtp_step : pc.wtp_step;

  auto dists = pc.distributions;
  if (o.fixed_params) {
    for (auto& d : dists) {
      d = cstm::ParameterDistribution::fixed(d.name, l.config.parameters.at(d.name), d.support);
    }
  }
  const auto samples = cstm::generate_psa_params(dists, n_sim, seed);
  const auto& config = l.config;
  const auto outcomes = cstm::evaluate_psa(
      samples,
      [&config](const cstm::ParameterValues& row) {
        return cstm::run_analysis(cstm::build_models(config, row), cstm::analysis_settings(config, row))
            .outcomes();
      },
      o.threads);
  const auto grid = cstm::wtp_grid(wtp_max, wtp_step);
  const auto curves = cstm::ceac(outcomes, grid);
  const auto loss = cstm::expected_loss_and_evpi(outcomes, grid);

  const auto dir = output_dir(o);
  const auto f = table_format(o);
  std::vector<std::string> files{
      cstm::write_table(dir, "psa_samples", cstm::psa_samples_table(samples), f),
      cstm::write_table(dir, "psa_outcomes", cstm::psa_outcomes_table(outcomes), f),
      cstm::write_table(dir, "ceac", cstm::ceac_table(curves, outcomes.strategies), f),
      cstm::write_table(dir, "elc", cstm::elc_table(loss, outcomes.strategies), f)};
  write_manifest(dir, "psa", &l, files,
                 json{{"seed", seed}, {"n_sim", n_sim}, {"wtp_max", wtp_max}, {"wtp_step", wtp_step},
                      {"fixed_params", o.fixed_params}});

  std::cout << fmt::format("PSA: {} samples, seed {}\n", n_sim, seed);
  std::cout << fmt::format("{:>10} {:>10} {:>12}\n", "WTP", "Optimal", "EVPI");
  std::size_t last = grid.size();
  for (std::size_t w = 0; w < grid.size(); ++w) {
    const bool changed = last == grid.size() || curves.frontier[w] != curves.frontier[last];
    if (changed || w + 1 == grid.size()) {
      std::cout << fmt::format("{:>10} {:>10} {:>12}\n", cstm::format_dollars(grid[w]),
                               outcomes.strategies[curves.frontier[w]], cstm::format_dollars(loss.evpi[w]));
      last = w;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cohort state-transition models: traces, epidemiology, cost-effectiveness, PSA"};
  app.set_version_flag("--version", std::string(CSTM_VERSION));
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--model", o.model, "Bundled model name or path to a YAML/JSON config")
        ->capture_default_str();
    sub->add_option("--variant", o.variant, "Model variant (default from the config)");
    sub->add_option("--life-table", o.life_table, "Life table replacing the config's table");
    sub->add_option("--out", o.out, "Output directory (env CSTM_OUT_DIR, else ./cstm-out)");
    sub->add_option("--format", o.format, "Machine table format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  };

  auto* trace = app.add_subcommand("trace", "Simulate cohort traces for every strategy");
  common(trace);
  trace->add_option("--strategy", o.strategy, "Strategy shown on stdout (default first)");
  trace->add_option("--rows", o.rows, "Cycles shown on stdout")->capture_default_str();
  trace->add_flag("--export-model", o.export_model, "Also write each transition model");

  auto* epi = app.add_subcommand("epi", "Survival, life expectancy, prevalence");
  common(epi);

  auto* cea = app.add_subcommand("cea", "Expected outcomes and incremental analysis");
  common(cea);
  cea->add_option("--totals", o.totals, "CSV of strategy,cost,effect instead of a model");

  auto* psa = app.add_subcommand("psa", "Probabilistic sensitivity analysis");
  common(psa);
  psa->add_option("--n-sim", o.n_sim, "Number of samples (default from config)");
  psa->add_option("--seed", o.seed, "RNG seed (default from config)")->each([&](const std::string&) {
    o.seed_set = true;
  });
  psa->add_option("--wtp-max", o.wtp_max, "Largest willingness to pay");
  psa->add_option("--wtp-step", o.wtp_step, "Willingness-to-pay grid step");
  psa->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
  psa->add_flag("--fixed-params", o.fixed_params, "Hold every parameter at its base value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*trace) return cmd_trace(o);
    if (*epi) return cmd_epi(o);
    if (*cea) return cmd_cea(o);
    if (*psa) return cmd_psa(o);
  } catch (const cstm::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const cstm::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const cstm::Error& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
