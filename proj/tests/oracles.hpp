#pragma once

// Reference calculations that share no code with the library: direct
// quadrature of the free propagator, closed-form Gaussians, finite
// differences and a brute-force phasor scan.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

/// Free propagation by direct summation of the Fresnel kernel
/// sqrt(m / 2 pi i t) exp(i m (z - z')^2 / 2t) over the samples of psi0.
inline cplx fresnel_kernel_sum(const std::function<cplx(double)>& psi0, double a, double b,
                               std::size_t n, double mass, double t, double z) {
  const double h = (b - a) / static_cast<double>(n);
  const cplx pref = std::sqrt(cplx(mass, 0.0) / (2.0 * std::numbers::pi * cplx(0.0, t)));
  cplx sum = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double zp = a + h * static_cast<double>(i);
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    const double d = z - zp;
    sum += w * psi0(zp) * std::exp(cplx(0.0, mass * d * d / (2.0 * t)));
  }
  return pref * sum * h;
}

/// Free Gaussian of initial amplitude exp(-(z - c)^2 / 2 w^2), normalized,
/// with momentum p; closed form at time t.
inline cplx free_gaussian(double z, double c, double w, double p, double mass, double t) {
  const cplx s = 1.0 + cplx(0.0, t / (mass * w * w));
  const double v = p / mass;
  const double u = z - c - v * t;
  const cplx amp = std::pow(std::numbers::pi * w * w, -0.25) / std::sqrt(s);
  return amp * std::exp(-u * u / (2.0 * w * w * s) + cplx(0.0, p * z - p * p * t / (2.0 * mass)));
}

/// |psi|^2 of a Gaussian under constant force F: the free density displaced
/// by F t^2 / 2m.
inline double forced_gaussian_density(double z, double c, double w, double p, double mass,
                                      double F, double t) {
  return std::norm(free_gaussian(z - F * t * t / (2.0 * mass), c, w, p, mass, t));
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double second_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

/// |sum_i p_i exp(i rate m_i t)|.
inline double phasor_magnitude(const std::vector<double>& masses, const std::vector<double>& weights,
                               double rate, double t) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i)
    s += weights[i] * std::exp(cplx(0.0, rate * masses[i] * t));
  return std::abs(s);
}

/// First maximum of the phasor magnitude near 1 after it has dipped below
/// 1/2, found by a uniform scan and refined by ternary search.
inline double first_realignment(const std::vector<double>& masses, const std::vector<double>& weights,
                                double rate, double t_lo, double t_hi, std::size_t samples) {
  const double h = (t_hi - t_lo) / static_cast<double>(samples);
  double best_t = t_hi;
  bool left_dip = false;
  for (std::size_t i = 1; i <= samples; ++i) {
    const double t = t_lo + h * static_cast<double>(i);
    const double v = phasor_magnitude(masses, weights, rate, t);
    if (v < 0.5) left_dip = true;
    if (left_dip && v > 1.0 - 1e-3) {
      // Climb to the sampled maximum, then refine between its neighbours.
      double tm = t, vm = v;
      for (double tn = tm + h;; tn += h) {
        const double vn = phasor_magnitude(masses, weights, rate, tn);
        if (vn <= vm) break;
        tm = tn;
        vm = vn;
      }
      double a = tm - h, b = tm + h;
      for (int k = 0; k < 200; ++k) {
        const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
        if (phasor_magnitude(masses, weights, rate, m1) < phasor_magnitude(masses, weights, rate, m2))
          a = m1;
        else
          b = m2;
      }
      best_t = 0.5 * (a + b);
      break;
    }
  }
  return best_t;
}

/// Proper time along z(t) by composite Simpson on sqrt(1 - v^2), with v
/// from finite differences of z.
inline double proper_time_simpson(const std::function<double(double)>& z, double t, std::size_t n) {
  const double h = t / static_cast<double>(n);
  auto integrand = [&](double s) {
    const double dh = 1e-4 * (1.0 + std::abs(s));
    const double c = std::max(s, dh);
    const double v = (z(c + dh) - z(c - dh)) / (2.0 * dh);
    return std::sqrt(1.0 - v * v);
  };
  double sum = integrand(0.0) + integrand(t);
  for (std::size_t i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * integrand(h * static_cast<double>(i));
  return sum * h / 3.0;
}

/// Least-squares amplitude of cos/sin at wavenumber alpha relative to the
/// local mean, over whole periods centred on zc, for a sampled pattern.
/// Independent of the library fit: uses a plain three-parameter model on a
/// window short enough that the envelope is flat.
inline double local_contrast(const std::vector<double>& Z, const std::vector<double>& s, double alpha,
                             double zc, int periods) {
  const double half = periods * std::numbers::pi / alpha;
  double a[3][3] = {}, r[3] = {};
  for (std::size_t i = 0; i < Z.size(); ++i) {
    const double u = Z[i] - zc;
    if (std::abs(u) > half) continue;
    const double f[3] = {1.0, std::cos(alpha * u), std::sin(alpha * u)};
    for (int p = 0; p < 3; ++p) {
      r[p] += f[p] * s[i];
      for (int q = 0; q < 3; ++q) a[p][q] += f[p] * f[q];
    }
  }
  // Cramer's rule on the 3x3 normal equations.
  auto det3 = [](double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double d = det3(a);
  double x[3];
  for (int c = 0; c < 3; ++c) {
    double m[3][3];
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) m[p][q] = (q == c) ? r[p] : a[p][q];
    x[c] = det3(m) / d;
  }
  return std::hypot(x[1], x[2]) / x[0];
}

}  // namespace oracle
