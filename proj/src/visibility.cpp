#include "mwi/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

#include "mwi/errors.hpp"

namespace mwi {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double phi) {
  phi = std::remainder(phi, kTwoPi);
  return phi;
}

void check_pattern(const std::vector<double>& Z, const std::vector<double>& sigma, double alpha) {
  if (Z.size() != sigma.size() || Z.size() < 8) {
    throw ValidationError("fit needs matching Z and sigma arrays with at least 8 samples");
  }
  if (!(alpha > 0.0)) throw ValidationError("fringe wavenumber alpha must be positive");
  const double span = Z.back() - Z.front();
  const double h = span / static_cast<double>(Z.size() - 1);
  for (std::size_t i = 1; i < Z.size(); ++i) {
    if (std::abs(Z[i] - Z[i - 1] - h) > 1e-6 * h) throw ValidationError("fit needs a uniform Z grid");
  }
  const double period = kTwoPi / alpha;
  if (span < 3.0 * period) {
    std::ostringstream msg;
    msg << "insufficient fringes: Z range covers " << span / period << " periods (need 3)";
    throw ValidationError(msg.str());
  }
}

// Tapered samples and their DFT. The taper sin^(2p)(pi i / n) has 2p + 1
// Fourier components, so it widens every band by p bins on each side and
// cancels in ratios of band-limited parts; p grows with the number of
// bins between the bands to suppress leakage from non-periodic ends.
struct Spectrum {
  ComplexBuffer X;
  double z0 = 0.0;
  double dz = 1.0;
  double dk = 1.0;
  std::size_t n = 0;
  double k(std::size_t j) const {
    const auto jj = static_cast<double>(j);
    return (j <= n / 2 ? jj : jj - static_cast<double>(n)) * dk;
  }
};

int taper_power(const std::vector<double>& Z, double alpha) {
  const double half_gap_bins = 0.5 * alpha * (Z.back() - Z.front()) / kTwoPi;
  return std::clamp(static_cast<int>(std::floor(half_gap_bins)) - 1, 1, 4);
}

double taper(std::size_t i, std::size_t n, int p) {
  const double s = std::sin(std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return std::pow(s * s, p);
}

Spectrum tapered_spectrum(const std::vector<double>& Z, const std::vector<double>& y, double offset,
                          int p) {
  Spectrum s;
  s.n = Z.size();
  s.z0 = Z.front();
  s.dz = (Z.back() - Z.front()) / static_cast<double>(s.n - 1);
  s.dk = kTwoPi / (static_cast<double>(s.n) * s.dz);
  s.X.resize(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    s.X[i] = taper(i, s.n, p) * (y[i] - offset);
  }
  const std::size_t shape[1] = {s.n};
  fft_inplace(s.X, shape, FftDirection::forward);
  return s;
}

// Sum of the components with k in [k_lo, k_hi) evaluated at z.
Complex band_at(const Spectrum& s, double k_lo, double k_hi, double z) {
  Complex acc = 0.0;
  for (std::size_t j = 0; j < s.n; ++j) {
    const double k = s.k(j);
    if (k >= k_lo && k < k_hi) acc += s.X[j] * std::polar(1.0, k * (z - s.z0));
  }
  return acc / static_cast<double>(s.n);
}

// Power of the tapered samples at an arbitrary wavenumber.
double tapered_power(const std::vector<double>& Z, const std::vector<double>& y, double mean, double k,
                     int p) {
  const std::size_t n = Z.size();
  Complex acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += taper(i, n, p) * (y[i] - mean) * std::polar(1.0, -k * Z[i]);
  }
  return std::norm(acc);
}

double mean_of(const MassSpectrum& s) { return s.mean(); }

}  // namespace

FringeModel FringeModel::double_slit(double k0, double z1, double z2, double L) {
  if (!(k0 > 0.0) || !(L > 0.0)) throw ValidationError("double-slit fringe needs positive k0 and L");
  const double dz = std::abs(z1 - z2);
  if (!(dz > 0.0)) throw ValidationError("double-slit fringe needs distinct slits");
  FringeModel f;
  f.alpha = k0 * dz / L;
  return f;
}

std::string to_string(VisibilityMethod m) {
  switch (m) {
    case VisibilityMethod::fit:
      return "fit";
    case VisibilityMethod::short_time:
      return "short-time";
    case VisibilityMethod::phasor:
      return "phasor";
  }
  return "unknown";
}

VisibilityReport fit_visibility(const std::vector<double>& Z, const std::vector<double>& sigma,
                                double alpha) {
  check_pattern(Z, sigma, alpha);
  double s0 = 0.0, s1 = 0.0;
  for (std::size_t i = 0; i < Z.size(); ++i) {
    s0 += sigma[i];
    s1 += sigma[i] * Z[i];
  }
  const double zc = s0 > 0.0 ? s1 / s0 : 0.5 * (Z.front() + Z.back());
  VisibilityReport r;
  r.method = VisibilityMethod::fit;
  r.alpha = alpha;
  // sigma = P + Re[C exp(i alpha Z)] with P and C band-limited below alpha/2:
  // the least-squares split is the projection onto the two Fourier bands.
  const Spectrum sp = tapered_spectrum(Z, sigma, 0.0, taper_power(Z, alpha));
  const double P = band_at(sp, -0.5 * alpha, 0.5 * alpha, zc).real();
  const Complex B = 2.0 * band_at(sp, 0.5 * alpha, 1.5 * alpha, zc);
  if (!(P > 0.0)) return r;
  r.visibility = std::abs(B) / P;
  r.phase = r.visibility > 0.0 ? wrap_phase(std::arg(B) - alpha * zc) : 0.0;
  return r;
}

VisibilityReport fit_visibility(const Pattern& p, double alpha) {
  auto r = fit_visibility(p.Z(), p.total, alpha);
  r.spectrum = p.spectrum;
  return r;
}

double estimate_fringe_wavenumber(const Pattern& p) {
  const auto Z = p.Z();
  const auto& y = p.total;
  const std::size_t n = Z.size();
  if (n < 16) throw ValidationError("pattern too short to estimate a wavenumber");
  const double span = Z.back() - Z.front();
  const double k_lo = 3.0 * kTwoPi / span;
  const double k_hi = std::numbers::pi / p.grid.spacing;
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  const Spectrum sp = tapered_spectrum(Z, y, mean, 1);
  double best_k = k_lo;
  double best_power = -1.0;
  for (std::size_t j = 0; j <= n / 2; ++j) {
    const double k = sp.k(j);
    if (k < k_lo || k > k_hi) continue;
    if (std::norm(sp.X[j]) > best_power) {
      best_power = std::norm(sp.X[j]);
      best_k = k;
    }
  }
  // Golden-section search for the peak of the tapered power spectrum.
  auto loss = [&](double k) { return -tapered_power(Z, y, mean, k, 1); };
  double a = std::max(k_lo, best_k - sp.dk);
  double b = std::min(k_hi, best_k + sp.dk);
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = loss(c);
  double fd = loss(d);
  for (int it = 0; it < 80 && (b - a) > 1e-12 * best_k; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = loss(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = loss(d);
    }
  }
  return 0.5 * (a + b);
}

std::vector<double> dephasing_phase(const MassSpectrum& s, const FringeModel& fringe,
                                    const ScreenWorldline& w, double k0, double L) {
  const double mbar = mean_of(s);
  const double t_bar = arrival_time(mbar, k0, L);
  const double zdot = w.velocity(t_bar);
  std::vector<double> out;
  for (const auto& sp : s.nodes()) out.push_back(fringe.alpha * zdot * (mbar - sp.mass) * L / k0);
  return out;
}

std::vector<double> double_slit_dephasing(const MassSpectrum& s, double g, double t, double z1,
                                          double z2) {
  const double mbar = mean_of(s);
  std::vector<double> out;
  for (const auto& sp : s.nodes()) out.push_back(g * t * (mbar - sp.mass) * (z2 - z1));
  return out;
}

VisibilityReport phasor_visibility(const MassSpectrum& s, const std::vector<double>& phases) {
  const auto& nodes = s.nodes();
  if (phases.size() != nodes.size()) throw ValidationError("one phase per spectrum node required");
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!std::isfinite(phases[i])) throw ValidationError("dephasing phases must be finite");
    acc += nodes[i].weight * std::polar(1.0, phases[i]);
  }
  VisibilityReport r;
  r.method = VisibilityMethod::phasor;
  r.visibility = std::min(1.0, std::abs(acc));
  r.phase = std::arg(acc);
  r.spectrum = s.describe();
  return r;
}

VisibilityReport short_time_visibility(const MassSpectrum& s, const FringeModel& fringe,
                                       const ScreenWorldline& w, double t_mbar) {
  const double zdot = w.velocity(t_mbar);
  const double zddot = w.lab_acceleration(t_mbar);
  const double rho2 = s.variance() / (s.mean() * s.mean());
  const double a = fringe.alpha;
  const double corr = 0.5 * a * a * zdot * zdot * t_mbar * t_mbar * rho2;
  if (!(corr < 0.5)) {
    std::ostringstream msg;
    msg << "use phasor_visibility: short-time correction " << corr << " is outside the expansion (< 0.5)";
    throw ValidationError(msg.str());
  }
  VisibilityReport r;
  r.method = VisibilityMethod::short_time;
  r.visibility = fringe.V * (1.0 - corr);
  r.phase = 0.5 * a * zddot * t_mbar * t_mbar * rho2;
  r.t_eval = t_mbar;
  r.alpha = a;
  r.spectrum = s.describe();
  return r;
}

double double_slit_short_time(double g, double dz, double dm, double t) {
  const double x = g * dz * dm * t;
  const double corr = 0.5 * x * x;
  if (!(corr < 0.5)) {
    std::ostringstream msg;
    msg << "use phasor_visibility: short-time correction " << corr << " is outside the expansion (< 0.5)";
    throw ValidationError(msg.str());
  }
  return 1.0 - corr;
}

double thermal_decoherence_time(double n_oscillators, double kT, double g, double dz) {
  if (!(n_oscillators > 0.0) || !(kT > 0.0) || !(g > 0.0) || !(dz != 0.0)) {
    throw ValidationError("thermal_decoherence_time requires positive N, kT, g and nonzero dz");
  }
  return std::sqrt(2.0 / n_oscillators) / (kT * g * std::abs(dz));
}

Revival find_revival(const MassSpectrum& s, const FringeModel& fringe, const ScreenWorldline& w,
                     double k0, double L) {
  if (s.continuous()) throw ValidationError("no exact revival: continuous spectra never rephase");
  if (w.kind() != WorldlineKind::uniform_acceleration) {
    throw ValidationError("find_revival requires a uniform-acceleration worldline");
  }
  std::vector<double> masses;
  for (const auto& sp : s.nodes()) {
    if (sp.weight > 0.0) masses.push_back(sp.mass);
  }
  std::sort(masses.begin(), masses.end());
  std::vector<double> distinct;
  for (double m : masses) {
    if (distinct.empty() || m - distinct.back() > 1e-12 * m) distinct.push_back(m);
  }
  const double rate = fringe.alpha * w.g() * L / k0;
  if (distinct.size() < 2 || rate == 0.0) return {0.0, true};

  std::vector<double> diffs;
  for (std::size_t i = 1; i < distinct.size(); ++i) diffs.push_back(distinct[i] - distinct[0]);
  const double dmin = *std::min_element(diffs.begin(), diffs.end());
  // Each ratio diff/dmin must be p/q with q <= 1000 within 1e-9.
  std::vector<long long> num, den;
  for (double d : diffs) {
    const double r = d / dmin;
    long long q = 1;
    for (; q <= 1000; ++q) {
      const double x = r * static_cast<double>(q);
      if (std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, x)) break;
    }
    if (q > 1000) {
      std::ostringstream msg;
      msg << "no exact revival: mass spacings are incommensurate (ratio " << r << ")";
      throw ValidationError(msg.str());
    }
    num.push_back(std::llround(r * static_cast<double>(q)));
    den.push_back(q);
  }
  long long Q = 1;
  for (long long q : den) Q = std::lcm(Q, q);
  long long G = 0;
  for (std::size_t i = 0; i < num.size(); ++i) G = std::gcd(G, num[i] * (Q / den[i]));
  const double d = dmin * static_cast<double>(G) / static_cast<double>(Q);
  return {kTwoPi / (std::abs(rate) * d), false};
}

VisibilityReport proper_time_visibility(const MassSpectrum& s, double dtau) {
  if (!std::isfinite(dtau)) throw ValidationError("proper-time difference must be finite");
  std::vector<double> phases;
  for (const auto& sp : s.nodes()) phases.push_back((sp.mass - s.mean()) * dtau);
  return phasor_visibility(s, phases);
}

std::string visibility_curve_csv(const std::vector<CurveRow>& rows) {
  std::string out = "t,V_fit,V_shorttime,V_phasor,phi\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g\n", r.t, r.v_fit, r.v_short,
                  r.v_phasor, r.phi);
    out += buf;
  }
  return out;
}

}  // namespace mwi
