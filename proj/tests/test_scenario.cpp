#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "mwi/errors.hpp"
#include "mwi/scenario.hpp"

using namespace mwi;
namespace fs = std::filesystem;

namespace {

const std::string kMinimal = R"(units: natural
experiment: pattern
k0: 200
L: 100
initial_state: {kind: double-slit, z1: 0.5, z2: -0.5, epsilon: 0.02}
spectrum:
  kind: discrete
  species:
    - {mass: 20000, weight: 0.5}
    - {mass: 22000, weight: 0.5}
screen: {kind: rest}
grid:
  z: {points: 32768, extent: 200}
  pattern_points: 1024
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("mwi_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string error_of(const std::string& yaml, const std::vector<std::string>& overrides = {}) {
  try {
    parse_scenario(yaml, overrides);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MWI_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("minimal scenario loads with defaults") {
  const auto s = parse_scenario(kMinimal);
  CHECK(s.experiment == Experiment::pattern);
  CHECK(s.L == 100.0);
  CHECK(s.initial.k0 == 200.0);
  CHECK(s.initial.width_x == 1.0);
  CHECK(s.spectrum.nodes().size() == 2);
  CHECK(s.method == PatternMethod::shifted_pattern);
  CHECK(s.pattern_points == 1024);
  CHECK(s.outputs.pattern_csv == "pattern.csv");
}

TEST_CASE("validation errors name the field") {
  CHECK(error_of(kMinimal, {"spectrum.species.0.mass=-1"}).find("spectrum.species[0].mass") != std::string::npos);
  CHECK(error_of(kMinimal, {"spectrum.species.1.weight=0.48"}).find("weights must sum to 1") != std::string::npos);
  CHECK(error_of(kMinimal, {"bogus=1"}).find("unknown key") != std::string::npos);
  CHECK(error_of(kMinimal, {"initial_state.colour=red"}).find("initial_state.colour") != std::string::npos);
  CHECK(error_of(kMinimal, {"units=SI"}).find("units") != std::string::npos);
  CHECK(error_of("experiment: pattern\n").find("units") != std::string::npos);
  CHECK(error_of(kMinimal, {"L=1"}).find("paraxial") != std::string::npos);
  CHECK(error_of(kMinimal, {"grid.z.points=1024"}).find("aliasing") != std::string::npos);
  CHECK(error_of("units: [").find("parse error") != std::string::npos);
  // Several problems are reported together.
  const auto both = error_of(kMinimal, {"spectrum.species.0.mass=-1", "k0=-3"});
  CHECK(both.find("spectrum.species[0].mass") != std::string::npos);
  CHECK(both.find("k0") != std::string::npos);
}

TEST_CASE("overrides replace dotted entries") {
  const auto s = parse_scenario(kMinimal, {"L=120", "initial_state.epsilon=0.03", "screen.kind=uniform-velocity",
                                           "screen.beta0=0.001"});
  CHECK(s.L == 120.0);
  CHECK(s.initial.slit.epsilon == 0.03);
  REQUIRE(s.screen);
  CHECK(s.screen->kind() == WorldlineKind::uniform_velocity);
  CHECK(error_of(kMinimal, {"novalue"}).find("key=value") != std::string::npos);
}

TEST_CASE("runs are deterministic and JSON re-parses") {
  const auto s = parse_scenario(kMinimal);
  const auto a = scratch("det_a"), b = scratch("det_b");
  const auto ra = run(s, a);
  run(s, b);
  REQUIRE(ra.files.size() == 3);
  for (const auto& f : ra.files) CHECK(slurp(f) == slurp(b / f.filename()));
  const auto report = nlohmann::json::parse(slurp(a / "report.json"));
  CHECK(report["V_fit"].get<double>() == doctest::Approx(1.0).epsilon(1e-3));
  const auto pattern = nlohmann::json::parse(slurp(a / "pattern.json"));
  CHECK(pattern["Z"].size() == 1024);
  CHECK(pattern["sigma_total"].size() == 1024);
}

TEST_CASE("revival scenario emits the predicted time") {
  const auto s = load_scenario(fs::path(MWI_SCENARIO_DIR) / "revival.yaml");
  const auto dir = scratch("revival");
  run(s, dir);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["t_rev"].get<double>() == doctest::Approx(4000.0).epsilon(1e-6));
  CHECK(report["V_at_t_rev"].get<double>() >= 0.99);
}

TEST_CASE("command-line exit status") {
  const auto dir = scratch("cli");
  const std::string scen = std::string(MWI_SCENARIO_DIR) + "/double_slit_rest.yaml";
  CHECK(run_cli("run " + scen + " -q -o " + dir.string()) == 0);
  CHECK(fs::exists(dir / "pattern.csv"));
  CHECK(run_cli("run " + scen + " -q -o " + dir.string() + " --override spectrum.species.0.mass=-1") == 1);
  CHECK(run_cli("run " + scen + " -q -o " + dir.string() + " --override nonsense=1") == 1);
  CHECK(run_cli("run /nonexistent.yaml") == 1);
  CHECK(run_cli("frobnicate") == 1);
  // A worldline that reaches light speed before arrival is a numerical failure.
  CHECK(run_cli("run " + scen + " -q -o " + dir.string() +
                " --override screen.kind=uniform-acceleration --override screen.g=0.5 --override method=full") == 2);
}
