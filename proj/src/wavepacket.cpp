#include "mwi/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mwi/errors.hpp"

namespace mwi {
namespace {

constexpr double kBandwidthSigmas = 6.0;
constexpr double kEdgeFractionLimit = 1e-9;

double envelope(const InitialState& ini, double z) {
  switch (ini.kind) {
    case ProfileKind::double_slit: {
      const auto& s = ini.slit;
      const double a = (z - s.z1) / s.epsilon;
      const double b = (z - s.z2) / s.epsilon;
      return std::exp(-0.5 * a * a) + std::exp(-0.5 * b * b);
    }
    case ProfileKind::gaussian: {
      const double a = (z - ini.gaussian.center) / ini.gaussian.width;
      return std::exp(-0.5 * a * a);
    }
    case ProfileKind::custom_grid:
      break;
  }
  return 0.0;
}

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    std::ostringstream msg;
    msg << "invalid time: " << t << " (must be finite and non-negative)";
    throw ValidationError(msg.str());
  }
}

void check_spectrum(const WavefunctionGrid& f) {
  const double frac = spectral_edge_fraction(f);
  if (frac > kEdgeFractionLimit) {
    std::ostringstream msg;
    msg << "aliasing: " << frac << " of the spectral power lies at the grid Nyquist edge";
    throw NumericalError(msg.str());
  }
}

}  // namespace

void InitialState::validate() const {
  if (!(k0 > 0.0)) throw ValidationError("initial_state.k0 must be positive");
  if (!(width_x > 0.0)) throw ValidationError("initial_state.width_x must be positive");
  if (!(width_y > 0.0)) throw ValidationError("initial_state.width_y must be positive");
  switch (kind) {
    case ProfileKind::double_slit: {
      if (!(slit.epsilon > 0.0)) throw ValidationError("initial_state.epsilon must be positive");
      const double sep = std::abs(slit.z1 - slit.z2);
      if (!(sep > 0.0)) throw ValidationError("initial_state.z1 and z2 must differ");
      if (slit.epsilon > 0.1 * sep) {
        throw ValidationError("initial_state.epsilon must be much smaller than |z1 - z2| (at most 10%)");
      }
      break;
    }
    case ProfileKind::gaussian:
      if (!(gaussian.width > 0.0)) throw ValidationError("initial_state.width_z must be positive");
      break;
    case ProfileKind::custom_grid:
      if (!custom) throw ValidationError("custom-grid initial state requires amplitudes");
      if (custom->axes().size() != 1 || custom->axes()[0].label != 'z' ||
          custom->representation() != Representation::position) {
        throw ValidationError("custom-grid initial state must be a 1D position grid on z");
      }
      return;
  }
  if (z_grid.points < 2 || !(z_grid.extent > 0.0)) {
    throw ValidationError("grid.z needs points >= 2 and a positive extent");
  }
  if (x_grid.points != 0 && !(x_grid.extent > 0.0)) {
    throw ValidationError("grid.x needs a positive extent");
  }
}

double InitialState::packet_size() const {
  double z_span = 0.0;
  switch (kind) {
    case ProfileKind::double_slit:
      z_span = std::abs(slit.z1 - slit.z2) + 2.0 * slit.epsilon;
      break;
    case ProfileKind::gaussian:
      z_span = 2.0 * gaussian.width;
      break;
    case ProfileKind::custom_grid: {
      const auto d = custom->marginal('z');
      const auto& a = custom->axes()[0];
      z_span = 2.0 * moments(d, a.origin, a.spacing).rms;
      break;
    }
  }
  return std::max({width_x, width_y, z_span});
}

double InitialState::z_bandwidth() const {
  switch (kind) {
    case ProfileKind::double_slit:
      return kBandwidthSigmas / slit.epsilon;
    case ProfileKind::gaussian:
      return kBandwidthSigmas / gaussian.width;
    case ProfileKind::custom_grid:
      break;
  }
  return 0.0;
}

WavefunctionGrid sample_initial_state(const InitialState& ini) {
  ini.validate();
  if (ini.kind == ProfileKind::custom_grid) {
    WavefunctionGrid psi = *ini.custom;
    const double n = psi.norm();
    if (!(n > 0.0)) throw ValidationError("custom-grid amplitudes are identically zero");
    for (auto& c : psi.values()) c /= std::sqrt(n);
    return psi;
  }
  const Axis az = Axis::centered('z', ini.z_grid.points, ini.z_grid.extent, ini.z_grid.center);
  std::vector<double> zv(az.points);
  for (std::size_t i = 0; i < az.points; ++i) zv[i] = envelope(ini, az.coordinate(i));

  std::vector<Axis> axes;
  std::vector<double> band;
  ComplexBuffer data;
  if (ini.x_grid.points == 0) {
    axes = {az};
    band = {ini.z_bandwidth()};
    data.assign(zv.begin(), zv.end());
  } else {
    const Axis ax = Axis::centered('x', ini.x_grid.points, ini.x_grid.extent, ini.x_grid.center);
    axes = {ax, az};
    band = {kBandwidthSigmas / ini.width_x, ini.z_bandwidth()};
    data.resize(ax.points * az.points);
    for (std::size_t i = 0; i < ax.points; ++i) {
      const double u = ax.coordinate(i) / ini.width_x;
      const double ex = std::exp(-0.5 * u * u);
      for (std::size_t j = 0; j < az.points; ++j) data[i * az.points + j] = ex * zv[j];
    }
  }
  WavefunctionGrid psi(std::move(axes), std::move(data), Representation::position, std::move(band));
  const double n = psi.norm();
  for (auto& c : psi.values()) c /= std::sqrt(n);
  return psi;
}

void require_nonrelativistic(double k0, double mass) {
  if (!(mass > 0.0)) throw ValidationError("mass must be positive");
  if (!(k0 / mass < 0.1)) {
    std::ostringstream msg;
    msg << "non-relativistic guard violated: k0/m = " << k0 / mass << " (must be < 0.1)";
    throw ValidationError(msg.str());
  }
}

WavefunctionGrid evolve_lambda(const WavefunctionGrid& f, double lambda) {
  if (f.representation() != Representation::momentum) {
    throw ValidationError("expected a momentum-representation grid");
  }
  check_spectrum(f);
  if (lambda == 0.0) return to_position(f);
  WavefunctionGrid g = f;
  const auto& axes = g.axes();
  auto phases = [&](const Axis& a) {
    std::vector<Complex> p(a.points);
    for (std::size_t i = 0; i < a.points; ++i) {
      const double k = a.carrier + a.wavenumber(i);
      p[i] = std::polar(1.0, -0.5 * k * k * lambda);
    }
    return p;
  };
  auto& v = g.buffer();
  if (axes.size() == 1) {
    const auto p = phases(axes[0]);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= p[i];
  } else {
    const auto p0 = phases(axes[0]);
    const auto p1 = phases(axes[1]);
    const std::size_t n1 = axes[1].points;
    for (std::size_t i = 0; i < axes[0].points; ++i) {
      for (std::size_t j = 0; j < n1; ++j) v[i * n1 + j] *= p0[i] * p1[j];
    }
  }
  return to_position(g);
}

WavefunctionGrid kspace_evolve(const WavefunctionGrid& f, double mass, double t) {
  check_time(t);
  if (!(mass > 0.0)) throw ValidationError("mass must be positive");
  return evolve_lambda(f, t / mass);
}

WavefunctionGrid fresnel_propagate(const WavefunctionGrid& psi, double mass, double t) {
  check_time(t);
  if (!(mass > 0.0)) throw ValidationError("mass must be positive");
  return evolve_lambda(to_momentum(psi), t / mass);
}

WavefunctionGrid final_packet(const InitialState& ini, double L) {
  if (!(L > 0.0)) throw ValidationError("L must be positive");
  ini.validate();
  const double l = ini.packet_size();
  if (l / L > 0.1) {
    std::ostringstream msg;
    msg << "paraxial assumption violated: packet size " << l << " is more than 10% of L = " << L;
    throw ValidationError(msg.str());
  }
  return evolve_lambda(to_momentum(sample_initial_state(ini)), L / ini.k0);
}

double arrival_time(double mass, double k0, double L) {
  if (!(mass > 0.0) || !(k0 > 0.0) || !(L > 0.0)) {
    throw ValidationError("arrival_time requires positive mass, k0 and L");
  }
  return mass * L / k0;
}

double gaussian_width(double w0, double mass, double t) {
  const double s = t / (mass * w0 * w0);
  return w0 * std::sqrt(1.0 + s * s);
}

double gaussian_density(double x, double c0, double v, double w0, double mass, double t) {
  const double w = gaussian_width(w0, mass, t);
  const double u = (x - c0 - v * t) / w;
  return std::exp(-u * u) / (std::sqrt(std::numbers::pi) * w);
}

}  // namespace mwi
