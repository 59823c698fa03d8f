#include "mwi/labframe.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "mwi/errors.hpp"
#include "mwi/visibility.hpp"

namespace mwi {
namespace {

double axis_component(const Vec3& v, char label) {
  switch (label) {
    case 'x':
      return v[0];
    case 'y':
      return v[1];
    default:
      return v[2];
  }
}

// Strang steps P(h/2) K(h) P(h/2) with V = -F.x on the gridded axes.
class Stepper {
 public:
  Stepper(const std::vector<Axis>& axes, double mass, const Vec3& force, double h) : axes_(axes) {
    for (const auto& a : axes) {
      const double F = axis_component(force, a.label);
      std::vector<Complex> p(a.points), k(a.points);
      for (std::size_t i = 0; i < a.points; ++i) {
        p[i] = std::polar(1.0, 0.5 * F * a.coordinate(i) * h);
        const double kk = a.carrier + a.wavenumber(i);
        k[i] = std::polar(1.0, -0.5 * kk * kk * h / mass);
      }
      potential_.push_back(std::move(p));
      kinetic_.push_back(std::move(k));
    }
  }

  void step(WavefunctionGrid& psi) const {
    apply(psi.buffer(), potential_);
    WavefunctionGrid f = to_momentum(psi);
    apply(f.buffer(), kinetic_);
    psi = to_position(f);
    apply(psi.buffer(), potential_);
  }

 private:
  std::vector<Axis> axes_;
  std::vector<std::vector<Complex>> potential_;
  std::vector<std::vector<Complex>> kinetic_;

  void apply(ComplexBuffer& v, const std::vector<std::vector<Complex>>& f) const {
    if (axes_.size() == 1) {
      for (std::size_t i = 0; i < v.size(); ++i) v[i] *= f[0][i];
      return;
    }
    const std::size_t n1 = axes_[1].points;
    for (std::size_t i = 0; i < axes_[0].points; ++i) {
      for (std::size_t j = 0; j < n1; ++j) v[i * n1 + j] *= f[0][i] * f[1][j];
    }
  }
};

WavefunctionGrid run_steps(const WavefunctionGrid& psi, double mass, const Vec3& force, double t,
                           std::size_t n, const std::function<void(double, const WavefunctionGrid&)>& obs) {
  const double h = t / static_cast<double>(n);
  const Stepper stepper(psi.axes(), mass, force, h);
  WavefunctionGrid out = psi;
  for (std::size_t j = 1; j <= n; ++j) {
    stepper.step(out);
    if (obs) obs(h * static_cast<double>(j), out);
  }
  return out;
}

double max_density_change(const WavefunctionGrid& a, const WavefunctionGrid& b) {
  double change = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = std::norm(a.values()[i]);
    const double db = std::norm(b.values()[i]);
    change = std::max(change, std::abs(da - db));
    peak = std::max(peak, db);
  }
  return peak > 0.0 ? change / peak : 0.0;
}

void check_lab_preconditions(const WavefunctionGrid& psi, double mass, const Vec3& F, double t) {
  if (psi.representation() != Representation::position) {
    throw ValidationError("evolve_packet_lab expects a position-representation grid");
  }
  if (!(mass > 0.0)) throw ValidationError("species mass must be positive");
  if (!(t >= 0.0) || !std::isfinite(t)) {
    std::ostringstream msg;
    msg << "invalid time: " << t;
    throw ValidationError(msg.str());
  }
  const auto& band = psi.bandwidth();
  for (std::size_t a = 0; a < psi.axes().size(); ++a) {
    const auto& ax = psi.axes()[a];
    const double gain = std::abs(axis_component(F, ax.label)) * t;
    const double b = band.empty() ? 0.0 : band[a];
    if ((std::abs(ax.carrier) + b + gain) / mass >= 0.1) {
      std::ostringstream msg;
      msg << "non-relativistic guard violated on axis '" << ax.label << "': |k|/m reaches "
          << (std::abs(ax.carrier) + b + gain) / mass;
      throw ValidationError(msg.str());
    }
    if (b + gain > ax.nyquist()) {
      std::ostringstream msg;
      msg << "aliasing: bandwidth " << b << " plus momentum gain " << gain << " on axis '" << ax.label
          << "' exceeds the Nyquist wavenumber " << ax.nyquist();
      throw NumericalError(msg.str());
    }
    const auto d = psi.marginal(ax.label);
    const double c = moments(d, ax.origin, ax.spacing).mean;
    const double shift =
        c + ax.carrier * t / mass + 0.5 * axis_component(F, ax.label) * t * t / mass;
    if (shift < ax.origin || shift > ax.end()) {
      std::ostringstream msg;
      msg << "packet leaves the lab grid on axis '" << ax.label << "' (centroid reaches " << shift << ")";
      throw NumericalError(msg.str());
    }
  }
}

}  // namespace

GravityModel GravityModel::eep(Vec3 g) {
  for (double c : g) {
    if (!std::isfinite(c)) throw ValidationError("gravity.g components must be finite");
  }
  GravityModel m;
  m.kind_ = GravityKind::eep;
  m.g_ = g;
  return m;
}

GravityModel GravityModel::violating(std::vector<SpeciesForce> forces) {
  if (forces.empty()) throw ValidationError("violating gravity needs at least one species force");
  for (const auto& f : forces) {
    if (!(f.mass > 0.0)) throw ValidationError("violating gravity: species mass must be positive");
  }
  GravityModel m;
  m.kind_ = GravityKind::violating;
  m.forces_ = std::move(forces);
  return m;
}

Vec3 GravityModel::force(double mass) const {
  if (kind_ == GravityKind::eep) return {-mass * g_[0], -mass * g_[1], -mass * g_[2]};
  for (const auto& f : forces_) {
    if (std::abs(f.mass - mass) <= 1e-9 * mass) return f.G;
  }
  std::ostringstream msg;
  msg << "violating gravity has no force for mass " << mass;
  throw ValidationError(msg.str());
}

std::string GravityModel::describe() const {
  std::ostringstream s;
  s.precision(12);
  if (kind_ == GravityKind::eep) {
    s << "eep(g=[" << g_[0] << ", " << g_[1] << ", " << g_[2] << "])";
  } else {
    s << "violating(";
    for (std::size_t i = 0; i < forces_.size(); ++i) {
      s << (i ? ", " : "") << forces_[i].mass << ":[" << forces_[i].G[0] << ", " << forces_[i].G[1]
        << ", " << forces_[i].G[2] << "]";
    }
    s << ")";
  }
  return s.str();
}

Vec3 heisenberg_mean(const HeisenbergTrajectory& traj, double t) {
  if (!(t >= 0.0)) throw ValidationError("invalid time: heisenberg_mean needs t >= 0");
  if (!(traj.mass > 0.0)) throw ValidationError("species mass must be positive");
  const Vec3 F = traj.model.force(traj.mass);
  Vec3 x{};
  for (int i = 0; i < 3; ++i) {
    x[i] = traj.x0[i] + traj.p0[i] * t / traj.mass + 0.5 * F[i] / traj.mass * t * t;
  }
  return x;
}

WavefunctionGrid evolve_packet_lab(const WavefunctionGrid& psi, const Species& s,
                                   const GravityModel& model, double t, const LabEvolutionOptions& opt) {
  const Vec3 F = model.force(s.mass);
  check_lab_preconditions(psi, s.mass, F, t);
  if (t == 0.0) return psi;
  if (opt.steps > 0) return run_steps(psi, s.mass, F, t, opt.steps, opt.observer);

  std::size_t n = 1;
  WavefunctionGrid coarse = run_steps(psi, s.mass, F, t, n, {});
  while (true) {
    if (2 * n > opt.max_steps) {
      std::ostringstream msg;
      msg << "step count too low for target accuracy: density still changes by more than "
          << opt.tolerance << " of peak at " << n << " steps (max " << opt.max_steps << ")";
      throw NumericalError(msg.str());
    }
    WavefunctionGrid fine = run_steps(psi, s.mass, F, t, 2 * n, {});
    n *= 2;
    const double change = max_density_change(coarse, fine);
    coarse = std::move(fine);
    if (change <= opt.tolerance) break;
  }
  if (opt.observer) return run_steps(psi, s.mass, F, t, n, opt.observer);
  return coarse;
}

GridSpec lab_grid(const InitialState& ini, const MassSpectrum& spectrum, const GravityModel& model,
                  double t_max) {
  double dmin = 0.0, dmax = 0.0, kmax = 0.0;
  for (const auto& sp : spectrum.nodes()) {
    const double Fz = model.force(sp.mass)[2];
    const double d = 0.5 * Fz / sp.mass * t_max * t_max;
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
    kmax = std::max(kmax, std::abs(Fz) * t_max);
  }
  GridSpec out;
  const double extent = ini.z_grid.extent + (dmax - dmin);
  double spacing = ini.z_grid.extent / static_cast<double>(ini.z_grid.points);
  spacing = std::min(spacing, std::numbers::pi / (1.1 * (ini.z_bandwidth() + kmax)));
  out.points = std::bit_ceil(static_cast<std::size_t>(std::ceil(extent / spacing)));
  out.extent = extent;
  out.center = ini.z_grid.center + 0.5 * (dmax + dmin);
  return out;
}

Pattern lab_pattern(const InitialState& ini, const MassSpectrum& spectrum, const GravityModel& model,
                    double L, const LabPatternOptions& opt) {
  ini.validate();
  if (ini.kind == ProfileKind::custom_grid) {
    throw ValidationError("lab_pattern needs a double-slit or gaussian initial state");
  }
  if (!(L > 0.0)) throw ValidationError("L must be positive");
  const auto& nodes = spectrum.nodes();
  for (const auto& sp : nodes) require_nonrelativistic(ini.k0, sp.mass);
  const auto& fo = opt.full;
  if (fo.min_steps < 2 || fo.max_steps < 2 * fo.min_steps) {
    throw ValidationError("lab flux step bounds need min_steps >= 2 and max_steps >= 2 min_steps");
  }

  struct Window {
    double t_m, lo, hi;
  };
  std::vector<Window> windows;
  double t_max = 0.0;
  for (const auto& sp : nodes) {
    const double t_m = arrival_time(sp.mass, ini.k0, L);
    const double half = fo.window_widths * gaussian_width(ini.width_y, sp.mass, t_m) / (ini.k0 / sp.mass);
    if (t_m - half < 0.0) {
      throw ValidationError("screen not present at arrival: crossing window starts before t = 0");
    }
    windows.push_back({t_m, t_m - half, t_m + half});
    t_max = std::max(t_max, t_m + half);
  }

  InitialState lab_ini = ini;
  lab_ini.x_grid = {};
  lab_ini.z_grid = lab_grid(ini, spectrum, model, t_max);
  const WavefunctionGrid psi0 = sample_initial_state(lab_ini);
  const Axis& za = psi0.axes()[0];

  const double t_bar = arrival_time(spectrum.mean(), ini.k0, L);
  const double t_ref = opt.reference_time.value_or(t_bar);
  const double u = opt.screen_z_velocity.value_or(0.0);
  PatternGrid grid;
  if (opt.grid) {
    grid = *opt.grid;
  } else {
    InitialState z_only = ini;
    z_only.x_grid = {};
    double mean_drop = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      mean_drop += nodes[k].weight * 0.5 * model.force(nodes[k].mass)[2] / nodes[k].mass *
                   windows[k].t_m * windows[k].t_m;
    }
    grid = auto_pattern_grid(final_packet(z_only, L), -mean_drop, opt.grid_points);
  }

  std::vector<Pattern> parts(nodes.size());
  parallel_for(nodes.size(), opt.threads, [&](std::size_t k) {
    const Species sp = nodes[k];
    const Window win = windows[k];
    const Vec3 F = model.force(sp.mass);
    const double v = ini.k0 / sp.mass;
    check_lab_preconditions(psi0, sp.mass, F, win.hi);
    const WavefunctionGrid start = evolve_packet_lab(psi0, sp, model, win.lo);

    auto y_density = [&](double t) {
      return gaussian_density(L - 0.5 * F[1] / sp.mass * t * t, 0.0, v, ini.width_y, sp.mass, t);
    };
    auto accumulate = [&](const WavefunctionGrid& psi, double t, double weight, std::vector<double>& acc) {
      const double pre = weight * v * y_density(t);
      if (pre == 0.0) return;
      const auto d = psi.marginal('z');
      const double shift = u * (t - t_ref);
      for (std::size_t i = 0; i < grid.points; ++i) {
        acc[i] += pre * interpolate_cubic(d, za.origin, za.spacing, grid.coordinate(i) + shift);
      }
    };

    std::size_t n = 2 * fo.min_steps;
    std::vector<double> sigma;
    while (true) {
      const double h = (win.hi - win.lo) / static_cast<double>(n);
      const Stepper stepper(start.axes(), sp.mass, F, h);
      std::vector<double> fine(grid.points, 0.0), coarse(grid.points, 0.0);
      WavefunctionGrid psi = start;
      for (std::size_t j = 0; j <= n; ++j) {
        if (j > 0) stepper.step(psi);
        const double t = win.lo + h * static_cast<double>(j);
        const double w = (j == 0 || j == n) ? 0.5 : 1.0;
        accumulate(psi, t, w * h, fine);
        if (j % 2 == 0) {
          accumulate(psi, t, w * 2.0 * h, coarse);
        }
      }
      double change = 0.0, peak = 0.0;
      for (std::size_t i = 0; i < grid.points; ++i) {
        change = std::max(change, std::abs(fine[i] - coarse[i]));
        peak = std::max(peak, fine[i]);
      }
      sigma = std::move(fine);
      if (change <= fo.tolerance * peak) break;
      if (2 * n > fo.max_steps) {
        std::ostringstream msg;
        msg << "lab flux quadrature not converged at " << n << " steps";
        throw NumericalError(msg.str());
      }
      n *= 2;
    }
    for (auto& s : sigma) s = std::max(0.0, s);
    Pattern p;
    p.grid = grid;
    p.total = sigma;
    p.species = {sp};
    p.per_species = {std::move(sigma)};
    p.method = PatternMethod::lab_frame;
    parts[k] = std::move(p);
  });
  Pattern out = total_pattern(parts, spectrum);
  std::ostringstream desc;
  desc << "lab screen y=" << L << " u_z=" << u << " " << model.describe();
  out.worldline = desc.str();
  return out;
}

FrameEquivalenceReport frame_equivalence_check(const InitialState& ini, const MassSpectrum& spectrum,
                                               const GravityModel& model, double L,
                                               const LabPatternOptions& opt) {
  if (model.kind() != GravityKind::eep) {
    throw ValidationError("frame_equivalence_check accepts only the eep gravity kind");
  }
  if (model.g()[0] != 0.0 || model.g()[1] != 0.0) {
    throw ValidationError("frame_equivalence_check needs gravity along z only");
  }
  const double g = model.g()[2];
  const ScreenWorldline screen = ScreenWorldline::uniform_acceleration(L, g);
  const double t_bar = arrival_time(spectrum.mean(), ini.k0, L);

  LabPatternOptions lab_opt = opt;
  lab_opt.screen_z_velocity.reset();
  if (!lab_opt.grid) {
    InitialState z_only = ini;
    z_only.x_grid = {};
    lab_opt.grid = auto_pattern_grid(final_packet(z_only, L), 0.5 * g * t_bar * t_bar, opt.grid_points);
  }
  SimulationOptions lorentz_opt;
  lorentz_opt.method = PatternMethod::full_flux;
  lorentz_opt.grid = lab_opt.grid;
  lorentz_opt.full = opt.full;
  lorentz_opt.threads = opt.threads;

  auto lab = std::async(std::launch::async, [&] { return lab_pattern(ini, spectrum, model, L, lab_opt); });
  auto lorentz = std::async(std::launch::async, [&] { return simulate_pattern(ini, spectrum, screen, lorentz_opt); });
  const Pattern a = lab.get();
  const Pattern b = lorentz.get();

  double alpha = 0.0;
  if (ini.kind == ProfileKind::double_slit) {
    alpha = FringeModel::double_slit(ini.k0, ini.slit.z1, ini.slit.z2, L).alpha;
  } else {
    alpha = estimate_fringe_wavenumber(b);
  }
  FrameEquivalenceReport r;
  double se = 0.0;
  for (std::size_t i = 0; i < a.total.size(); ++i) se += (a.total[i] - b.total[i]) * (a.total[i] - b.total[i]);
  r.rms_pattern_diff = std::sqrt(se / static_cast<double>(a.total.size())) / b.peak();
  r.v_lab = fit_visibility(a, alpha).visibility;
  r.v_lorentz = fit_visibility(b, alpha).visibility;
  r.delta_visibility = std::abs(r.v_lab - r.v_lorentz);
  r.g = g;
  r.L = L;
  r.t_mbar = t_bar;
  r.alpha = alpha;
  r.spectrum = spectrum.describe();
  r.pass = r.rms_pattern_diff <= 0.01 && r.delta_visibility <= 0.01;
  return r;
}

FrameEquivalenceReport frame_equivalence_check(const InitialState& ini, const MassSpectrum& spectrum,
                                               double g, double L, const LabPatternOptions& opt) {
  return frame_equivalence_check(ini, spectrum, GravityModel::eep({0.0, 0.0, g}), L, opt);
}

std::string frame_equivalence_json(const FrameEquivalenceReport& r) {
  nlohmann::json j;
  j["rms_pattern_diff"] = r.rms_pattern_diff;
  j["delta_visibility"] = r.delta_visibility;
  j["pass"] = r.pass;
  j["v_lab"] = r.v_lab;
  j["v_lorentz"] = r.v_lorentz;
  j["parameters"] = {{"g", r.g}, {"L", r.L}, {"t_mbar", r.t_mbar}, {"alpha", r.alpha},
                     {"spectrum", r.spectrum}};
  return j.dump(2);
}

std::vector<double> eep_violation_separation(const MassSpectrum& spectrum, const GravityModel& model,
                                             double t) {
  if (!(t >= 0.0)) throw ValidationError("invalid time: separation needs t >= 0");
  std::vector<double> z;
  for (const auto& sp : spectrum.nodes()) z.push_back(0.5 * model.force(sp.mass)[2] / sp.mass * t * t);
  return z;
}

}  // namespace mwi
