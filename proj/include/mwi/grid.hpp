#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mwi/fft.hpp"

namespace mwi {

/// One uniformly sampled axis. Coordinates are origin + i * spacing.
struct Axis {
  char label = 'z';
  std::size_t points = 0;
  double spacing = 0.0;
  double origin = 0.0;
  /// Carrier wavenumber removed from the sampled envelope.
  double carrier = 0.0;

  double coordinate(std::size_t i) const { return origin + static_cast<double>(i) * spacing; }
  double extent() const { return static_cast<double>(points) * spacing; }
  double end() const { return origin + static_cast<double>(points - 1) * spacing; }
  double wavenumber_spacing() const;
  /// Wavenumber of FFT bin i (FFT ordering, Nyquist bin negative).
  double wavenumber(std::size_t i) const;
  double nyquist() const;

  /// Axis of `points` samples centred on `center` spanning `extent`.
  static Axis centered(char label, std::size_t points, double extent, double center = 0.0);
};

enum class Representation { position, momentum };

/// Complex amplitudes of a 1D or 2D wavefunction on a uniform grid, stored
/// row-major with the first axis slowest. In momentum representation the
/// values are the unitary Fourier amplitudes in FFT order; the axes still
/// describe the conjugate position grid.
class WavefunctionGrid {
 public:
  WavefunctionGrid() = default;
  /// `bandwidth` holds the declared maximum |k| of the envelope per axis;
  /// empty means "unknown". Throws NumericalError("aliasing") when a declared
  /// bandwidth exceeds the axis Nyquist wavenumber.
  WavefunctionGrid(std::vector<Axis> axes, ComplexBuffer values,
                   Representation representation = Representation::position,
                   std::vector<double> bandwidth = {});

  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(char label) const;
  int axis_index(char label) const;
  bool has_axis(char label) const { return axis_index(label) >= 0; }
  std::vector<std::size_t> shape() const;
  std::size_t size() const { return values_.size(); }

  std::span<const Complex> values() const { return values_; }
  std::span<Complex> values() { return values_; }
  ComplexBuffer& buffer() { return values_; }
  const ComplexBuffer& buffer() const { return values_; }

  Representation representation() const { return representation_; }
  const std::vector<double>& bandwidth() const { return bandwidth_; }
  void set_bandwidth(std::vector<double> bandwidth);

  /// Volume element of the current representation (product of dx or dk).
  double cell_volume() const;
  /// Integral of |psi|^2 over the grid.
  double norm() const;
  /// |psi|^2 integrated over every axis except `label` (position
  /// representation only).
  std::vector<double> marginal(char label) const;

 private:
  std::vector<Axis> axes_;
  ComplexBuffer values_;
  Representation representation_ = Representation::position;
  std::vector<double> bandwidth_;
};

/// Unitary transforms between the two representations.
WavefunctionGrid to_momentum(const WavefunctionGrid& psi);
WavefunctionGrid to_position(const WavefunctionGrid& f);

/// Fraction of spectral power within the outer 10% of the Nyquist band of
/// each axis. Used to detect content the grid cannot represent.
double spectral_edge_fraction(const WavefunctionGrid& f);

/// Centroid and root-mean-square width of a sampled density.
struct Moments {
  double mean = 0.0;
  double rms = 0.0;
  double integral = 0.0;
};
Moments moments(std::span<const double> density, double origin, double spacing);

/// Cubic (4-point Lagrange) interpolation of uniformly sampled data; zero
/// outside the sampled range.
double interpolate_cubic(std::span<const double> samples, double origin, double spacing, double x);

}  // namespace mwi
