#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mwi/labframe.hpp"
#include "mwi/measurement.hpp"
#include "mwi/spectrum.hpp"
#include "mwi/wavepacket.hpp"
#include "mwi/worldline.hpp"

namespace mwi {

enum class Experiment { pattern, visibility_curve, revival, tau_dec, frame_equivalence };
std::string to_string(Experiment e);

struct SweepSpec {
  double t_start = 0.0;
  double t_stop = 0.0;
  std::size_t points = 0;

  std::vector<double> times() const;
};

struct OutputSpec {
  std::string pattern_csv = "pattern.csv";
  std::string pattern_json = "pattern.json";
  std::string report_json = "report.json";
  std::string curve_csv = "visibility_curve.csv";
};

/// Fully validated experiment description.
struct Scenario {
  Experiment experiment = Experiment::pattern;
  InitialState initial;
  MassSpectrum spectrum = MassSpectrum::discrete({{1.0, 1.0}});
  std::optional<ScreenWorldline> screen;
  std::optional<GravityModel> gravity;
  double L = 0.0;
  PatternMethod method = PatternMethod::shifted_pattern;
  std::size_t pattern_points = 2048;
  FullFluxOptions full;
  std::optional<SweepSpec> sweep;
  /// Lab screen z velocity. NaN stands for "matched": the mean fall
  /// velocity of the packets at t_mbar.
  std::optional<double> screen_z_velocity;
  OutputSpec outputs;
  /// Canonical YAML of the validated scenario (after overrides).
  std::string source;
};

/// Parses and validates YAML text. Every problem found is reported in one
/// ValidationError, one "field.path: reason" line each.
Scenario parse_scenario(const std::string& yaml, const std::vector<std::string>& overrides = {});
Scenario load_scenario(const std::filesystem::path& path,
                       const std::vector<std::string>& overrides = {});

struct RunResult {
  std::vector<std::filesystem::path> files;
  /// Human-readable one-line summary.
  std::string summary;
};

/// Runs the experiment and writes its outputs into `output_dir`.
RunResult run(const Scenario& s, const std::filesystem::path& output_dir);

}  // namespace mwi
