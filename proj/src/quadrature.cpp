#include "mwi/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "mwi/errors.hpp"

namespace mwi {

QuadratureRule gauss_legendre(std::size_t n) {
  if (n == 0) throw ValidationError("quadrature needs at least one node");
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        const double dj = static_cast<double>(j);
        p0 = ((2.0 * dj - 1.0) * x * p1 - (dj - 1.0) * p2) / dj;
      }
      dp = dn * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

namespace {

// Physicists' Gauss-Hermite nodes (weight exp(-x^2)) by Newton iteration on
// the orthonormal recurrence.
QuadratureRule hermite_physicists(std::size_t n) {
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  const double dn = static_cast<double>(n);
  double z = 0.0;
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * dn + 1.0) - 1.85575 * std::pow(2.0 * dn + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(dn, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * r.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * r.nodes[1];
    } else {
      z = 2.0 * z - r.nodes[i - 2];
    }
    double pp = 0.0;
    int it = 0;
    for (; it < 200; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double dj = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / dj) * p2 - std::sqrt((dj - 1.0) / dj) * p3;
      }
      pp = std::sqrt(2.0 * dn) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    if (it == 200) throw NumericalError("Gauss-Hermite node iteration did not converge");
    r.nodes[i] = z;
    r.nodes[n - 1 - i] = -z;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / (pp * pp);
  }
  return r;
}

}  // namespace

QuadratureRule gauss_hermite_normal(std::size_t n) {
  if (n == 0) throw ValidationError("quadrature needs at least one node");
  static std::mutex mu;
  static std::map<std::size_t, QuadratureRule> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  QuadratureRule r = hermite_physicists(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r.nodes[i] *= std::numbers::sqrt2;
    total += r.weights[i];
  }
  for (auto& w : r.weights) w /= total;
  // Ascending order.
  for (std::size_t i = 0; i < n / 2; ++i) {
    std::swap(r.nodes[i], r.nodes[n - 1 - i]);
    std::swap(r.weights[i], r.weights[n - 1 - i]);
  }
  cache.emplace(n, r);
  return r;
}

}  // namespace mwi
