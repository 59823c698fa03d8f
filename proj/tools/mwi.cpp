// Command-line front end: mwi run <scenario.yaml> [--output-dir DIR]
// [--override key=value ...] [--quiet]

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mwi/errors.hpp"
#include "mwi/scenario.hpp"

namespace {

constexpr int kValidationFailure = 1;
constexpr int kNumericalFailure = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matter-wave interferometry of particles with internal mass spectra"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string output_dir = ".";
  std::vector<std::string> overrides;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run the experiment described by a scenario file");
  run->add_option("scenario", scenario_path, "Scenario YAML file")->required();
  run->add_option("--output-dir,-o", output_dir, "Directory for CSV/JSON outputs");
  run->add_option("--override", overrides, "Dotted key=value replacing a scenario entry")
      ->take_all();
  run->add_flag("--quiet,-q", quiet, "Suppress the summary line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationFailure;
  }

  try {
    const auto scenario = mwi::load_scenario(scenario_path, overrides);
    const auto result = mwi::run(scenario, output_dir);
    if (!quiet) {
      std::cout << result.summary << '\n';
      for (const auto& f : result.files) std::cout << "  wrote " << f.string() << '\n';
    }
    return 0;
  } catch (const mwi::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const mwi::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}
