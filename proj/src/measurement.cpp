#include "mwi/measurement.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "mwi/errors.hpp"

namespace mwi {

SpeciesPacket::SpeciesPacket(const InitialState& ini, std::shared_ptr<const WavefunctionGrid> f_z,
                             Species s)
    : f_(std::move(f_z)), species_(s), k0_(ini.k0), width_x_(ini.width_x), width_y_(ini.width_y) {
  if (!f_ || f_->axes().size() != 1 || f_->representation() != Representation::momentum) {
    throw ValidationError("SpeciesPacket needs 1D momentum amplitudes on z");
  }
  if (!(s.mass > 0.0)) throw ValidationError("species mass must be positive");
  require_nonrelativistic(k0_, s.mass);
}

WavefunctionGrid SpeciesPacket::z_state(double t) const { return kspace_evolve(*f_, species_.mass, t); }

std::vector<double> SpeciesPacket::z_density(double t) const { return z_state(t).marginal('z'); }

double SpeciesPacket::x_density(double t, double x) const {
  return gaussian_density(x, 0.0, 0.0, width_x_, species_.mass, t);
}

double SpeciesPacket::y_density(double t, double y) const {
  return gaussian_density(y, 0.0, velocity(), width_y_, species_.mass, t);
}

double SpeciesPacket::density(const Event& e) const {
  const auto d = z_density(e.t);
  const auto& a = z_axis();
  return x_density(e.t, e.x) * y_density(e.t, e.y) * interpolate_cubic(d, a.origin, a.spacing, e.z);
}

double flux_rate(const std::function<double(const Event&)>& density, double velocity,
                 const ScreenWorldline& w, double X, double Z, double tau) {
  const Event e = proper_to_minkowski(w, {tau, X, 0.0, Z});
  const double g = proper_acceleration(w, w.coordinate_time(tau));
  return velocity * (1.0 + g * Z) * density(e);
}

double flux_rate(const SpeciesPacket& packet, const ScreenWorldline& w, double X, double Z,
                 double tau) {
  return flux_rate([&](const Event& e) { return packet.density(e); }, packet.velocity(), w, X, Z, tau);
}

std::vector<double> PatternGrid::coordinates() const {
  std::vector<double> z(points);
  for (std::size_t i = 0; i < points; ++i) z[i] = coordinate(i);
  return z;
}

std::string to_string(PatternMethod m) {
  switch (m) {
    case PatternMethod::full_flux:
      return "full-flux";
    case PatternMethod::shifted_pattern:
      return "shifted-pattern";
    case PatternMethod::lab_frame:
      return "lab-frame";
  }
  return "unknown";
}

double Pattern::peak() const {
  return total.empty() ? 0.0 : *std::max_element(total.begin(), total.end());
}

PatternGrid auto_pattern_grid(const WavefunctionGrid& psi_fin, double shift, std::size_t points) {
  if (points < 16) throw ValidationError("pattern grid needs at least 16 points");
  const auto d = psi_fin.marginal('z');
  const auto& a = psi_fin.axis('z');
  const Moments mo = moments(d, a.origin, a.spacing);
  PatternGrid g;
  g.points = points;
  g.spacing = 8.0 * mo.rms / static_cast<double>(points - 1);
  g.origin = mo.mean - 4.0 * mo.rms - shift;
  return g;
}

namespace {

Pattern single(const Species& s, const PatternGrid& grid, std::vector<double> sigma,
               PatternMethod method, const ScreenWorldline& w) {
  Pattern p;
  p.grid = grid;
  p.total = sigma;
  p.species = {s};
  p.per_species = {std::move(sigma)};
  p.method = method;
  p.worldline = w.describe();
  return p;
}

}  // namespace

Pattern integrate_pattern_shifted(const WavefunctionGrid& psi_fin, double k0, const Species& s,
                                  const ScreenWorldline& w, const PatternGrid& grid) {
  const double t_m = arrival_time(s.mass, k0, w.L());
  const double beta = w.velocity(t_m);
  if (!(beta * beta < 1e-3)) {
    std::ostringstream msg;
    msg << "use full-flux method: beta^2 = " << beta * beta << " at arrival (shifted pattern needs < 1e-3)";
    throw ValidationError(msg.str());
  }
  const double shift = w.z_of_t(t_m);
  const auto d = psi_fin.marginal('z');
  const auto& a = psi_fin.axis('z');
  std::vector<double> sigma(grid.points);
  for (std::size_t i = 0; i < grid.points; ++i) {
    sigma[i] = std::max(0.0, interpolate_cubic(d, a.origin, a.spacing, shift + grid.coordinate(i)));
  }
  return single(s, grid, std::move(sigma), PatternMethod::shifted_pattern, w);
}

Pattern integrate_pattern_full(const SpeciesPacket& packet, const ScreenWorldline& w,
                               const PatternGrid& grid, const FullFluxOptions& opt) {
  if (opt.min_steps < 2 || opt.max_steps < 2 * opt.min_steps) {
    throw ValidationError("full-flux step bounds need min_steps >= 2 and max_steps >= 2 min_steps");
  }
  const double L = w.L();
  const double v = packet.velocity();
  const double t_m = arrival_time(packet.mass(), packet.k0(), L);
  const double a = gaussian_width(packet.width_y(), packet.mass(), t_m);
  const double half = opt.window_widths * a / v;
  const double t_lo = t_m - half;
  const double t_hi = t_m + half;
  if (t_lo < 0.0 || !w.valid_at(t_lo) || !w.valid_at(t_hi)) {
    std::ostringstream msg;
    msg << "screen not present at arrival: crossing window [" << t_lo << ", " << t_hi
        << "] exceeds worldline validity [" << w.t_min() << ", " << w.t_max() << "]";
    throw ValidationError(msg.str());
  }
  const auto& za = packet.z_axis();
  const std::size_t n_z = grid.points;

  auto integrand = [&](double t, std::vector<double>& acc, double weight) {
    const auto bg = beta_gamma(w, t);
    const double zs = w.z_of_t(t);
    const double pre = weight * v * bg.gamma * packet.y_density(t, L);
    if (pre == 0.0) return;
    const auto d = packet.z_density(t);
    for (std::size_t i = 0; i < n_z; ++i) {
      acc[i] += pre * interpolate_cubic(d, za.origin, za.spacing, zs + grid.coordinate(i) / bg.gamma);
    }
  };

  std::size_t n = opt.min_steps;
  double h = (t_hi - t_lo) / static_cast<double>(n);
  std::vector<double> acc(n_z, 0.0);
  integrand(t_lo, acc, 0.5);
  integrand(t_hi, acc, 0.5);
  for (std::size_t j = 1; j < n; ++j) integrand(t_lo + h * static_cast<double>(j), acc, 1.0);
  std::vector<double> sigma(n_z);
  for (std::size_t i = 0; i < n_z; ++i) sigma[i] = h * acc[i];

  while (true) {
    // Doubling adds only the midpoints of the previous level.
    h *= 0.5;
    for (std::size_t j = 1; j < 2 * n; j += 2) integrand(t_lo + h * static_cast<double>(j), acc, 1.0);
    n *= 2;
    double change = 0.0;
    double peak = 0.0;
    for (std::size_t i = 0; i < n_z; ++i) {
      const double next = h * acc[i];
      change = std::max(change, std::abs(next - sigma[i]));
      peak = std::max(peak, next);
      sigma[i] = next;
    }
    if (change <= opt.tolerance * peak) break;
    if (2 * n > opt.max_steps) {
      std::ostringstream msg;
      msg << "full-flux quadrature not converged at " << n << " steps (change " << change / peak
          << " of peak)";
      throw NumericalError(msg.str());
    }
  }
  for (auto& s : sigma) s = std::max(0.0, s);
  return single({packet.mass(), packet.weight()}, grid, std::move(sigma), PatternMethod::full_flux, w);
}

std::shared_ptr<const WavefunctionGrid> z_momentum_amplitudes(const InitialState& ini) {
  InitialState z_only = ini;
  z_only.x_grid = {};
  return std::make_shared<const WavefunctionGrid>(to_momentum(sample_initial_state(z_only)));
}

Pattern integrate_pattern_full(const InitialState& ini, const Species& s, const ScreenWorldline& w,
                               const PatternGrid& grid, const FullFluxOptions& opt) {
  return integrate_pattern_full(SpeciesPacket(ini, z_momentum_amplitudes(ini), s), w, grid, opt);
}

Pattern total_pattern(const std::vector<Pattern>& patterns, const MassSpectrum& spectrum) {
  const auto& nodes = spectrum.nodes();
  if (patterns.size() != nodes.size()) {
    throw ValidationError("total_pattern needs one pattern per spectrum species");
  }
  Pattern out;
  out.grid = patterns.front().grid;
  out.method = patterns.front().method;
  out.worldline = patterns.front().worldline;
  out.spectrum = spectrum.describe();
  out.total.assign(out.grid.points, 0.0);
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    const auto& p = patterns[k];
    if (p.grid.points != out.grid.points ||
        std::abs(p.grid.origin - out.grid.origin) > 1e-12 * std::max(1.0, std::abs(out.grid.origin)) ||
        std::abs(p.grid.spacing - out.grid.spacing) > 1e-12 * out.grid.spacing) {
      throw ValidationError("total_pattern: per-species patterns are on mismatched Z grids");
    }
    if (p.per_species.size() != 1) throw ValidationError("total_pattern expects per-species patterns");
    const double wgt = nodes[k].weight;
    for (std::size_t i = 0; i < out.grid.points; ++i) out.total[i] += wgt * p.per_species[0][i];
    out.species.push_back(nodes[k]);
    out.per_species.push_back(p.per_species[0]);
  }
  return out;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  unsigned hw = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  hw = static_cast<unsigned>(std::min<std::size_t>(hw, n));
  if (hw <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < hw; ++k) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Pattern simulate_pattern(const InitialState& ini, const MassSpectrum& spectrum,
                         const ScreenWorldline& w, const SimulationOptions& opt) {
  ini.validate();
  for (const auto& s : spectrum.nodes()) require_nonrelativistic(ini.k0, s.mass);
  const double L = w.L();
  const auto f = z_momentum_amplitudes(ini);
  InitialState z_only = ini;
  z_only.x_grid = {};
  const WavefunctionGrid psi_fin = final_packet(z_only, L);
  const double t_bar = arrival_time(spectrum.mean(), ini.k0, L);
  const PatternGrid grid =
      opt.grid ? *opt.grid : auto_pattern_grid(psi_fin, w.z_of_t(t_bar), opt.grid_points);

  const auto& nodes = spectrum.nodes();
  std::vector<Pattern> parts(nodes.size());
  parallel_for(nodes.size(), opt.threads, [&](std::size_t k) {
    switch (opt.method) {
      case PatternMethod::shifted_pattern:
        parts[k] = integrate_pattern_shifted(psi_fin, ini.k0, nodes[k], w, grid);
        break;
      case PatternMethod::full_flux:
        parts[k] = integrate_pattern_full(SpeciesPacket(ini, f, nodes[k]), w, grid, opt.full);
        break;
      case PatternMethod::lab_frame:
        throw ValidationError("lab-frame patterns are produced by lab_pattern");
    }
  });
  return total_pattern(parts, spectrum);
}

std::string pattern_csv(const Pattern& p) {
  std::string out = "Z,sigma_total";
  char buf[64];
  for (const auto& s : p.species) {
    std::snprintf(buf, sizeof buf, ",sigma_m=%.12g", s.mass);
    out += buf;
  }
  out += '\n';
  for (std::size_t i = 0; i < p.grid.points; ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g", p.grid.coordinate(i), p.total[i]);
    out += buf;
    for (const auto& s : p.per_species) {
      std::snprintf(buf, sizeof buf, ",%.12g", s[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string pattern_json(const Pattern& p) {
  nlohmann::json j;
  j["method"] = to_string(p.method);
  j["worldline"] = p.worldline;
  j["spectrum"] = p.spectrum;
  j["grid"] = {{"origin", p.grid.origin}, {"spacing", p.grid.spacing}, {"points", p.grid.points}};
  j["Z"] = p.Z();
  j["sigma_total"] = p.total;
  auto species = nlohmann::json::array();
  for (std::size_t k = 0; k < p.species.size(); ++k) {
    species.push_back({{"mass", p.species[k].mass},
                       {"weight", p.species[k].weight},
                       {"sigma", p.per_species[k]}});
  }
  j["species"] = species;
  return j.dump(2);
}

}  // namespace mwi
