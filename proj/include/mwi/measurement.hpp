#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mwi/spectrum.hpp"
#include "mwi/wavepacket.hpp"
#include "mwi/worldline.hpp"

namespace mwi {

/// Free packet of one species. The z profile is gridded and shares its
/// momentum amplitudes with every other species; x and y are analytic
/// Gaussians, with the y centre moving at v = k0 / m.
class SpeciesPacket {
 public:
  SpeciesPacket(const InitialState& ini, std::shared_ptr<const WavefunctionGrid> f_z, Species s);

  double mass() const { return species_.mass; }
  double weight() const { return species_.weight; }
  double velocity() const { return k0_ / species_.mass; }
  double k0() const { return k0_; }
  double width_y() const { return width_y_; }
  const Axis& z_axis() const { return f_->axes()[0]; }
  const WavefunctionGrid& momentum_amplitudes() const { return *f_; }

  WavefunctionGrid z_state(double t) const;
  std::vector<double> z_density(double t) const;
  double x_density(double t, double x) const;
  double y_density(double t, double y) const;
  /// |psi|^2 at a Minkowski event (propagates the z grid to e.t).
  double density(const Event& e) const;

 private:
  std::shared_ptr<const WavefunctionGrid> f_;
  Species species_;
  double k0_;
  double width_x_;
  double width_y_;
};

/// Rate of detections per proper area per coordinate time at pixel (X, Z)
/// when the pixel's proper time is tau: v (1 + g Z) |psi|^2 at the event.
double flux_rate(const std::function<double(const Event&)>& density, double velocity,
                 const ScreenWorldline& w, double X, double Z, double tau);
double flux_rate(const SpeciesPacket& packet, const ScreenWorldline& w, double X, double Z,
                 double tau);

/// Uniform sampling of the screen coordinate Z.
struct PatternGrid {
  double origin = 0.0;
  double spacing = 1.0;
  std::size_t points = 0;

  std::vector<double> coordinates() const;
  double coordinate(std::size_t i) const { return origin + static_cast<double>(i) * spacing; }
};

enum class PatternMethod { full_flux, shifted_pattern, lab_frame };
std::string to_string(PatternMethod m);

/// Counts per proper area along Z, marginalized over X. Each species'
/// sigma integrates to 1; total is the weight-averaged sum.
struct Pattern {
  PatternGrid grid;
  std::vector<double> total;
  std::vector<Species> species;
  std::vector<std::vector<double>> per_species;
  PatternMethod method = PatternMethod::shifted_pattern;
  std::string worldline;
  std::string spectrum;

  std::vector<double> Z() const { return grid.coordinates(); }
  double peak() const;
};

struct FullFluxOptions {
  std::size_t min_steps = 64;
  std::size_t max_steps = 4096;
  /// Relative change (of the peak) below which refinement stops.
  double tolerance = 1e-3;
  /// Crossing window half-length in units of the y amplitude width at arrival.
  double window_widths = 6.0;
};

/// Auto grid centred on the shifted fringe envelope, +-4 rms wide.
PatternGrid auto_pattern_grid(const WavefunctionGrid& psi_fin, double shift,
                              std::size_t points = 2048);

/// Rigid translation of |psi_fin^z|^2 by z~(t_m). Requires beta^2 < 1e-3.
Pattern integrate_pattern_shifted(const WavefunctionGrid& psi_fin, double k0, const Species& s,
                                  const ScreenWorldline& w, const PatternGrid& grid);

/// Flux integral over the crossing window with trapezoid refinement.
Pattern integrate_pattern_full(const InitialState& ini, const Species& s, const ScreenWorldline& w,
                               const PatternGrid& grid, const FullFluxOptions& opt = {});
Pattern integrate_pattern_full(const SpeciesPacket& packet, const ScreenWorldline& w,
                               const PatternGrid& grid, const FullFluxOptions& opt = {});

/// sigma = sum_i p_i sigma_i over the spectrum's species or quadrature nodes.
Pattern total_pattern(const std::vector<Pattern>& patterns, const MassSpectrum& spectrum);

struct SimulationOptions {
  PatternMethod method = PatternMethod::shifted_pattern;
  std::optional<PatternGrid> grid;
  std::size_t grid_points = 2048;
  FullFluxOptions full;
  /// 0 uses the hardware concurrency.
  unsigned threads = 0;
};

/// Per-species patterns and their total for a spectrum on a screen.
Pattern simulate_pattern(const InitialState& ini, const MassSpectrum& spectrum,
                         const ScreenWorldline& w, const SimulationOptions& opt = {});

/// Momentum amplitudes of the z profile alone (no x grid).
std::shared_ptr<const WavefunctionGrid> z_momentum_amplitudes(const InitialState& ini);

std::string pattern_csv(const Pattern& p);
std::string pattern_json(const Pattern& p);

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace mwi
