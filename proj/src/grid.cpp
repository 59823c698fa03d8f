#include "mwi/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mwi/errors.hpp"

namespace mwi {

double Axis::wavenumber_spacing() const {
  return 2.0 * std::numbers::pi / (static_cast<double>(points) * spacing);
}

double Axis::wavenumber(std::size_t i) const {
  auto n = static_cast<std::ptrdiff_t>(points);
  auto j = static_cast<std::ptrdiff_t>(i);
  if (j >= n / 2) j -= n;
  return static_cast<double>(j) * wavenumber_spacing();
}

double Axis::nyquist() const { return std::numbers::pi / spacing; }

Axis Axis::centered(char label, std::size_t points, double extent, double center) {
  if (points < 2) throw ValidationError("axis needs at least two points");
  if (!(extent > 0.0)) throw ValidationError("axis extent must be positive");
  Axis a;
  a.label = label;
  a.points = points;
  a.spacing = extent / static_cast<double>(points);
  a.origin = center - 0.5 * extent;
  return a;
}

WavefunctionGrid::WavefunctionGrid(std::vector<Axis> axes, ComplexBuffer values,
                                   Representation representation, std::vector<double> bandwidth)
    : axes_(std::move(axes)), values_(std::move(values)), representation_(representation) {
  if (axes_.empty() || axes_.size() > 2) {
    throw ValidationError("WavefunctionGrid supports one or two axes");
  }
  std::size_t total = 1;
  for (const auto& a : axes_) {
    if (a.points < 2 || !(a.spacing > 0.0)) throw ValidationError("invalid grid axis");
    if ((a.points & (a.points - 1)) != 0) {
      throw ValidationError("grid sample count must be a power of two");
    }
    total *= a.points;
  }
  if (total != values_.size()) throw ValidationError("grid value count does not match axes");
  set_bandwidth(std::move(bandwidth));
}

void WavefunctionGrid::set_bandwidth(std::vector<double> bandwidth) {
  if (!bandwidth.empty() && bandwidth.size() != axes_.size()) {
    throw ValidationError("bandwidth must be given per axis");
  }
  for (std::size_t i = 0; i < bandwidth.size(); ++i) {
    if (bandwidth[i] > axes_[i].nyquist()) {
      std::ostringstream msg;
      msg << "aliasing: declared bandwidth " << bandwidth[i] << " on axis '" << axes_[i].label
          << "' exceeds the grid Nyquist wavenumber " << axes_[i].nyquist();
      throw NumericalError(msg.str());
    }
  }
  bandwidth_ = std::move(bandwidth);
}

const Axis& WavefunctionGrid::axis(char label) const {
  int i = axis_index(label);
  if (i < 0) throw ValidationError(std::string("grid has no axis '") + label + "'");
  return axes_[static_cast<std::size_t>(i)];
}

int WavefunctionGrid::axis_index(char label) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].label == label) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::size_t> WavefunctionGrid::shape() const {
  std::vector<std::size_t> s;
  for (const auto& a : axes_) s.push_back(a.points);
  return s;
}

double WavefunctionGrid::cell_volume() const {
  double v = 1.0;
  for (const auto& a : axes_) {
    v *= representation_ == Representation::position ? a.spacing : a.wavenumber_spacing();
  }
  return v;
}

double WavefunctionGrid::norm() const {
  double sum = 0.0;
  for (const auto& c : values_) sum += std::norm(c);
  return sum * cell_volume();
}

std::vector<double> WavefunctionGrid::marginal(char label) const {
  if (representation_ != Representation::position) {
    throw ValidationError("marginal density requires the position representation");
  }
  const int idx = axis_index(label);
  if (idx < 0) throw ValidationError(std::string("grid has no axis '") + label + "'");
  const auto& target = axes_[static_cast<std::size_t>(idx)];
  std::vector<double> out(target.points, 0.0);
  if (axes_.size() == 1) {
    for (std::size_t i = 0; i < values_.size(); ++i) out[i] = std::norm(values_[i]);
    return out;
  }
  const std::size_t n0 = axes_[0].points;
  const std::size_t n1 = axes_[1].points;
  const double other = axes_[idx == 0 ? 1 : 0].spacing;
  for (std::size_t i = 0; i < n0; ++i) {
    for (std::size_t j = 0; j < n1; ++j) {
      out[idx == 0 ? i : j] += std::norm(values_[i * n1 + j]) * other;
    }
  }
  return out;
}

namespace {

// Multiplies each element by the product over axes of f_axis(index).
template <class F>
void apply_separable_phase(ComplexBuffer& data, const std::vector<Axis>& axes, F&& per_axis) {
  if (axes.size() == 1) {
    for (std::size_t i = 0; i < data.size(); ++i) data[i] *= per_axis(0, i);
    return;
  }
  const std::size_t n0 = axes[0].points;
  const std::size_t n1 = axes[1].points;
  std::vector<Complex> f1(n1);
  for (std::size_t j = 0; j < n1; ++j) f1[j] = per_axis(1, j);
  for (std::size_t i = 0; i < n0; ++i) {
    const Complex f0 = per_axis(0, i);
    for (std::size_t j = 0; j < n1; ++j) data[i * n1 + j] *= f0 * f1[j];
  }
}

}  // namespace

WavefunctionGrid to_momentum(const WavefunctionGrid& psi) {
  if (psi.representation() != Representation::position) {
    throw ValidationError("to_momentum expects a position-representation grid");
  }
  ComplexBuffer data = psi.buffer();
  auto shape = psi.shape();
  fft_inplace(data, shape, FftDirection::forward);
  const auto& axes = psi.axes();
  apply_separable_phase(data, axes, [&](std::size_t a, std::size_t i) {
    const auto& ax = axes[a];
    const double k = ax.wavenumber(i);
    return std::polar(ax.spacing / std::sqrt(2.0 * std::numbers::pi), -k * ax.origin);
  });
  return WavefunctionGrid(axes, std::move(data), Representation::momentum, psi.bandwidth());
}

WavefunctionGrid to_position(const WavefunctionGrid& f) {
  if (f.representation() != Representation::momentum) {
    throw ValidationError("to_position expects a momentum-representation grid");
  }
  ComplexBuffer data = f.buffer();
  const auto& axes = f.axes();
  apply_separable_phase(data, axes, [&](std::size_t a, std::size_t i) {
    const auto& ax = axes[a];
    const double k = ax.wavenumber(i);
    return std::polar(ax.wavenumber_spacing() / std::sqrt(2.0 * std::numbers::pi), k * ax.origin);
  });
  auto shape = f.shape();
  fft_inplace(data, shape, FftDirection::backward);
  return WavefunctionGrid(axes, std::move(data), Representation::position, f.bandwidth());
}

double spectral_edge_fraction(const WavefunctionGrid& f) {
  if (f.representation() != Representation::momentum) {
    throw ValidationError("spectral_edge_fraction expects a momentum-representation grid");
  }
  const auto& axes = f.axes();
  auto near_edge = [&](std::size_t a, std::size_t i) {
    return std::abs(axes[a].wavenumber(i)) > 0.9 * axes[a].nyquist();
  };
  double edge = 0.0;
  double total = 0.0;
  auto values = f.values();
  if (axes.size() == 1) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double p = std::norm(values[i]);
      total += p;
      if (near_edge(0, i)) edge += p;
    }
  } else {
    const std::size_t n1 = axes[1].points;
    for (std::size_t i = 0; i < axes[0].points; ++i) {
      for (std::size_t j = 0; j < n1; ++j) {
        const double p = std::norm(values[i * n1 + j]);
        total += p;
        if (near_edge(0, i) || near_edge(1, j)) edge += p;
      }
    }
  }
  return total > 0.0 ? edge / total : 0.0;
}

Moments moments(std::span<const double> density, double origin, double spacing) {
  Moments m;
  double s0 = 0.0;
  double s1 = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double x = origin + static_cast<double>(i) * spacing;
    s0 += density[i];
    s1 += density[i] * x;
  }
  if (s0 <= 0.0) return m;
  m.mean = s1 / s0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double d = origin + static_cast<double>(i) * spacing - m.mean;
    s2 += density[i] * d * d;
  }
  m.rms = std::sqrt(s2 / s0);
  m.integral = s0 * spacing;
  return m;
}

double interpolate_cubic(std::span<const double> samples, double origin, double spacing, double x) {
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
  const double u = (x - origin) / spacing;
  if (!(u >= 0.0) || u > static_cast<double>(n - 1)) return 0.0;
  auto i = static_cast<std::ptrdiff_t>(std::floor(u));
  if (i >= n - 1) i = n - 2;
  const double t = u - static_cast<double>(i);
  auto at = [&](std::ptrdiff_t j) {
    return j < 0 || j >= n ? 0.0 : samples[static_cast<std::size_t>(j)];
  };
  const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
  // Lagrange weights on nodes -1, 0, 1, 2.
  const double w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
  const double w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  const double w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
  const double w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
  return w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3;
}

}  // namespace mwi
