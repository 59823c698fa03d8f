#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mwi/measurement.hpp"
#include "mwi/spectrum.hpp"
#include "mwi/wavepacket.hpp"

namespace mwi {

using Vec3 = std::array<double, 3>;

enum class GravityKind { eep, violating };

/// Uniform gravity. eep: potential m g.x for every species, so packets fall
/// along -g. violating: potential -G_m.x with G_m given per species mass.
class GravityModel {
 public:
  struct SpeciesForce {
    double mass = 0.0;
    Vec3 G{};
  };

  static GravityModel eep(Vec3 g);
  static GravityModel violating(std::vector<SpeciesForce> forces);

  GravityKind kind() const { return kind_; }
  const Vec3& g() const { return g_; }
  const std::vector<SpeciesForce>& forces() const { return forces_; }
  /// Force on a species of this mass (-m g for eep, G_m otherwise).
  Vec3 force(double mass) const;
  std::string describe() const;

 private:
  GravityKind kind_ = GravityKind::eep;
  Vec3 g_{};
  std::vector<SpeciesForce> forces_;
};

struct HeisenbergTrajectory {
  Vec3 x0{};
  Vec3 p0{};
  double mass = 1.0;
  GravityModel model = GravityModel::eep({0.0, 0.0, 0.0});
};

/// x0 + p0 t / m + (F / m) t^2 / 2.
Vec3 heisenberg_mean(const HeisenbergTrajectory& traj, double t);

struct LabEvolutionOptions {
  /// Strang steps; 0 selects the count by doubling until the density
  /// changes by less than `tolerance` of its peak.
  std::size_t steps = 0;
  std::size_t max_steps = 1u << 14;
  double tolerance = 1e-6;
  /// Called after every step with the elapsed time and state.
  std::function<void(double, const WavefunctionGrid&)> observer;
};

/// Evolves a position-space packet (z or x,z axes) under p^2/2m + V by
/// second-order operator splitting.
WavefunctionGrid evolve_packet_lab(const WavefunctionGrid& psi, const Species& s,
                                   const GravityModel& model, double t,
                                   const LabEvolutionOptions& opt = {});

struct LabPatternOptions {
  std::optional<PatternGrid> grid;
  std::size_t grid_points = 2048;
  FullFluxOptions full;
  /// Screen velocity along z; the pixel at Z sits at z = Z + u (t - t_ref).
  std::optional<double> screen_z_velocity;
  /// Defaults to the mean-mass arrival time.
  std::optional<double> reference_time;
  unsigned threads = 0;
};

/// Flux accumulated on the screen plane y = L of the lab as every species
/// crosses it under gravity.
Pattern lab_pattern(const InitialState& ini, const MassSpectrum& spectrum, const GravityModel& model,
                    double L, const LabPatternOptions& opt = {});

/// Lab z grid wide and fine enough for the fall and momentum gain up to t_max.
GridSpec lab_grid(const InitialState& ini, const MassSpectrum& spectrum, const GravityModel& model,
                  double t_max);

struct FrameEquivalenceReport {
  double rms_pattern_diff = 0.0;
  double delta_visibility = 0.0;
  double v_lab = 0.0;
  double v_lorentz = 0.0;
  double g = 0.0;
  double L = 0.0;
  double t_mbar = 0.0;
  double alpha = 0.0;
  std::string spectrum;
  bool pass = false;
};

/// Static lab screen under gravity vs free packets on an accelerating screen.
/// Only the eep kind is accepted.
FrameEquivalenceReport frame_equivalence_check(const InitialState& ini, const MassSpectrum& spectrum,
                                               const GravityModel& model, double L,
                                               const LabPatternOptions& opt = {});
FrameEquivalenceReport frame_equivalence_check(const InitialState& ini, const MassSpectrum& spectrum,
                                               double g, double L, const LabPatternOptions& opt = {});
std::string frame_equivalence_json(const FrameEquivalenceReport& r);

/// z_m(t) = (G_m,z / m) t^2 / 2 for each spectrum node.
std::vector<double> eep_violation_separation(const MassSpectrum& spectrum, const GravityModel& model,
                                             double t);

}  // namespace mwi
