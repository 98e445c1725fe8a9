#include <doctest.h>

#include "support/fixture.hpp"
#include "support/printed_targets.hpp"

#include "cstm/config.hpp"
#include "cstm/model_io.hpp"
#include "cstm/report.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace cstm;
using namespace cstm::testing;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "cstm_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const auto stem = work_dir() / ("run" + std::to_string(counter++));
  const std::string cmd = "cd '" + work_dir().string() + "' && " + env + " '" CSTM_CLI_PATH "' " + args + " >'" +
                          stem.string() + ".out' 2>'" + stem.string() + ".err'";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(stem.string() + ".out");
  r.err = slurp(stem.string() + ".err");
  return r;
}

std::string out_dir(const std::string& name) {
  const auto d = work_dir() / name;
  fs::remove_all(d);
  return d.string();
}

std::map<std::string, std::string> directory_bytes(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
  return files;
}

fs::path write_config(const std::string& name, const std::string& from, const std::string& to) {
  auto text = slurp(fixture_config_path());
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
  const auto dir = work_dir() / ("cfg_" + name);
  fs::create_directories(dir);
  fs::copy_file(life_table_path(), dir / "sick_sicker_life_table.csv", fs::copy_options::overwrite_existing);
  std::ofstream(dir / "model.yaml") << text;
  return dir / "model.yaml";
}

std::string life_table_arg() { return "--life-table '" + life_table_path().string() + "'"; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("time-independent trace matches the printed table") {
  const auto dir = out_dir("trace_ti");
  const auto r = cli("trace --variant time-independent --out " + dir);
  REQUIRE(r.status == 0);
  const auto t = read_delimited(fs::path(dir) / "trace_SoC.csv");
  for (std::size_t c = 0; c < 6; ++c) {
    for (std::size_t s = 0; s < 4; ++s) {
      CHECK(std::abs(std::stod(t.rows[c][s + 1]) - kPrintedTrace[c][s]) <= 0.0005);
    }
  }
  CHECK(r.out.find("0.848    0.150    0.000    0.002") != std::string::npos);
}

TEST_CASE("reruns are byte-identical") {
  const std::vector<std::string> commands{"trace --variant tunnels --export-model", "epi", "cea",
                                          "cea --variant time-independent --format json",
                                          "psa --n-sim 40 --seed 11 --wtp-step 10000"};
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CAPTURE(commands[i]);
    const auto a = out_dir("rerun_a" + std::to_string(i));
    const auto b = out_dir("rerun_b" + std::to_string(i));
    const auto ra = cli(commands[i] + " " + life_table_arg() + " --out " + a);
    const auto rb = cli(commands[i] + " " + life_table_arg() + " --out " + b);
    REQUIRE(ra.status == 0);
    REQUIRE(rb.status == 0);
    CHECK(ra.out == rb.out);
    CHECK(directory_bytes(a) == directory_bytes(b));
  }
}

TEST_CASE("PSA output does not depend on the thread count") {
  const auto a = out_dir("psa_t1");
  const auto b = out_dir("psa_t4");
  REQUIRE(cli("psa --n-sim 60 --seed 5 --threads 1 --out " + a).status == 0);
  REQUIRE(cli("psa --n-sim 60 --seed 5 --threads 4 --out " + b).status == 0);
  CHECK(slurp(fs::path(a) / "psa_outcomes.csv") == slurp(fs::path(b) / "psa_outcomes.csv"));
  CHECK(slurp(fs::path(a) / "ceac.csv") == slurp(fs::path(b) / "ceac.csv"));
  CHECK(slurp(fs::path(a) / "elc.csv") == slurp(fs::path(b) / "elc.csv"));
}

TEST_CASE("a single fixed-parameter sample reproduces the base-case totals") {
  const auto psa = out_dir("psa_fixed");
  const auto cea = out_dir("cea_base");
  REQUIRE(cli("psa --n-sim 1 --seed 7 --fixed-params --out " + psa).status == 0);
  REQUIRE(cli("cea --out " + cea).status == 0);
  const auto outcomes = read_delimited(fs::path(psa) / "psa_outcomes.csv");
  const auto totals = read_delimited(fs::path(cea) / "totals.csv");
  REQUIRE(outcomes.rows.size() == totals.rows.size());
  for (std::size_t i = 0; i < totals.rows.size(); ++i) {
    CHECK(outcomes.rows[i][1] == totals.rows[i][0]);
    CHECK(outcomes.rows[i][2] == totals.rows[i][3]);
    CHECK(outcomes.rows[i][3] == totals.rows[i][4]);
  }
  const auto elc = read_delimited(fs::path(psa) / "elc.csv");
  for (const auto& row : elc.rows) CHECK(row.back() == "0");
}

TEST_CASE("every emitted table re-parses") {
  for (const char* format : {"csv", "json"}) {
    for (const char* command : {"trace", "epi", "cea", "psa --n-sim 20"}) {
      CAPTURE(command);
      CAPTURE(format);
      const auto dir = out_dir("tables");
      REQUIRE(cli(std::string(command) + " --format " + format + " --out " + dir).status == 0);
      std::size_t tables = 0;
      for (const auto& e : fs::directory_iterator(dir)) {
        const auto ext = e.path().extension();
        if (e.path().filename() == "manifest.json") continue;
        ++tables;
        const Table t = ext == ".csv" ? read_delimited(e.path())
                                      : table_from_json(nlohmann::ordered_json::parse(slurp(e.path())));
        CHECK_FALSE(t.header.empty());
        CHECK_FALSE(t.rows.empty());
        for (const auto& row : t.rows) CHECK(row.size() == t.header.size());
      }
      CHECK(tables > 0);
      const auto manifest = nlohmann::ordered_json::parse(slurp(fs::path(dir) / "manifest.json"));
      CHECK(manifest["files"].size() == tables);
      for (const auto& f : manifest["files"]) CHECK(fs::exists(fs::path(dir) / f.get<std::string>()));
    }
  }
}

TEST_CASE("exported models re-import to the built matrices") {
  const auto dir = out_dir("export");
  REQUIRE(cli("trace --export-model --out " + dir).status == 0);
  const auto config = load_config(fixture_config_path());
  for (const auto& m : build_models(config)) {
    CAPTURE(m.label);
    const auto back = read_transition_model_table(read_delimited(fs::path(dir) / ("model_" + m.label + ".csv")),
                                                  config.cycles);
    CHECK(back.space.names() == m.space.names());
    CHECK(back.space.absorbing() == m.space.absorbing());
    CHECK(back.model.matrices() == m.model.matrices());
  }
}

TEST_CASE("output directory from the environment") {
  const auto dir = out_dir("from_env");
  REQUIRE(cli("cea", "CSTM_OUT_DIR='" + dir + "'").status == 0);
  CHECK(fs::exists(fs::path(dir) / "totals.csv"));
  const auto flag = out_dir("from_flag");
  REQUIRE(cli("cea --out " + flag, "CSTM_OUT_DIR='" + dir + "_unused'").status == 0);
  CHECK(fs::exists(fs::path(flag) / "cea.csv"));
  CHECK_FALSE(fs::exists(dir + "_unused"));
}

TEST_CASE("cost-effectiveness from a totals file") {
  const auto path = work_dir() / "printed_totals.csv";
  std::ofstream(path) << "strategy,cost,effect\nSoC,115275,19.468\nA,212851,20.170\nB,196408,20.754\nAB,284877,21.575\n";
  const auto dir = out_dir("totals_in");
  const auto r = cli("cea --totals '" + path.string() + "' --out " + dir);
  REQUIRE(r.status == 0);
  const auto t = read_delimited(fs::path(dir) / "cea.csv");
  CHECK(t.rows[0][0] == "SoC");
  CHECK(t.rows[1][0] == "B");
  CHECK(t.rows[2][0] == "AB");
  CHECK(t.rows[3][t.column("status")] == "D");
}

TEST_CASE("exit codes") {
  CHECK(cli("").status == 2);
  CHECK(cli("cea --no-such-flag").status == 2);
  CHECK(cli("trace --rows many").status == 2);
  CHECK(cli("cea --model does-not-exist").status == 2);
  CHECK(cli("cea --variant weekly").status == 2);
  CHECK(cli("cea --life-table /nonexistent/table.csv").status == 2);

  const auto unknown_state = write_config("state", "S1: {H: p_S1H, S2: p_S1S2}", "S1: {H: p_S1H, S3: p_S1S2}");
  const auto r = cli("cea --model '" + unknown_state.string() + "'");
  CHECK(r.status == 2);
  CHECK(r.err.find("transitions.S1.S3") != std::string::npos);

  const auto rows = write_config("rows", "p_S1H: 0.5", "p_S1H: 0.95");
  CHECK(cli("trace --model '" + rows.string() + "'").status == 3);

  const auto huge = write_config("huge", "c_S2: 15000", "c_S2: 1e308");
  const auto h = cli("cea --variant time-independent --model '" + huge.string() + "' --out " + out_dir("huge"));
  CHECK(h.status == 4);
  CHECK(h.err.find("non-finite") != std::string::npos);

  CHECK(cli("--version").status == 0);
  CHECK(cli("cea --help").status == 0);
}

}
