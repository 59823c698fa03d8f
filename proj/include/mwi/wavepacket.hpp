#pragma once

#include <optional>
#include <vector>

#include "mwi/grid.hpp"

namespace mwi {

/// Two Gaussian slits of amplitude width epsilon centred on z1 and z2.
struct DoubleSlit {
  double z1 = 0.5;
  double z2 = -0.5;
  double epsilon = 0.02;
};

/// Single Gaussian profile along z, amplitude exp(-(z-c)^2 / (2 w^2)).
struct GaussianProfile {
  double center = 0.0;
  double width = 1.0;
};

/// Sampling of one transverse axis.
struct GridSpec {
  std::size_t points = 0;
  double extent = 0.0;
  double center = 0.0;
};

enum class ProfileKind { double_slit, gaussian, custom_grid };

/// Separable initial state: a z profile on a grid, Gaussian envelopes of
/// amplitude width width_x and width_y along x and y, and the carrier k0
/// along y.
struct InitialState {
  ProfileKind kind = ProfileKind::double_slit;
  DoubleSlit slit;
  GaussianProfile gaussian;
  /// Used when kind == custom_grid; must be a 1D position grid on z.
  std::optional<WavefunctionGrid> custom;
  double k0 = 200.0;
  double width_x = 1.0;
  double width_y = 1.0;
  GridSpec z_grid{1u << 15, 200.0, 0.0};
  /// Optional x grid; when points == 0 the x axis is left analytic.
  GridSpec x_grid{};

  /// Throws ValidationError describing the first violated invariant.
  void validate() const;
  /// Largest initial extent of the packet, compared against L.
  double packet_size() const;
  /// Declared maximum |k| of the z envelope.
  double z_bandwidth() const;
};

/// One rest-mass component.
struct Species {
  double mass = 1.0;
  double weight = 1.0;
};

/// Samples psi_ini on the configured grid(s), normalized to 1.
WavefunctionGrid sample_initial_state(const InitialState& ini);

/// Throws ValidationError unless k0 / m < 0.1.
void require_nonrelativistic(double k0, double mass);

/// psi_m(t) from its momentum amplitudes f (momentum representation).
WavefunctionGrid kspace_evolve(const WavefunctionGrid& f, double mass, double t);

/// Free evolution of a position-space packet by time t.
WavefunctionGrid fresnel_propagate(const WavefunctionGrid& psi, double mass, double t);

/// Free evolution parametrized by lambda = t / m, the only combination the
/// free propagator depends on.
WavefunctionGrid evolve_lambda(const WavefunctionGrid& f, double lambda);

/// The packet at the screen plane, independent of mass.
WavefunctionGrid final_packet(const InitialState& ini, double L);

/// t_m = m L / k0.
double arrival_time(double mass, double k0, double L);

/// Amplitude width of a free Gaussian of initial amplitude width w0 after t.
double gaussian_width(double w0, double mass, double t);

/// Normalized density of a free 1D Gaussian of amplitude width w0 centred on
/// c0 + v t, evaluated at x.
double gaussian_density(double x, double c0, double v, double w0, double mass, double t);

}  // namespace mwi
