#include "mwi/worldline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mwi/errors.hpp"
#include "mwi/quadrature.hpp"

namespace mwi {
namespace {

constexpr double kTimeTolerance = 1e-12;

void require_L(double L) {
  if (!(L > 0.0) || !std::isfinite(L)) throw ValidationError("screen L must be positive");
}

}  // namespace

ScreenWorldline ScreenWorldline::rest(double L) {
  require_L(L);
  ScreenWorldline w;
  w.L_ = L;
  return w;
}

ScreenWorldline ScreenWorldline::uniform_velocity(double L, double beta0) {
  require_L(L);
  if (!(std::abs(beta0) < 1.0)) throw NumericalError("superluminal worldline: |beta0| >= 1");
  ScreenWorldline w;
  w.kind_ = WorldlineKind::uniform_velocity;
  w.L_ = L;
  w.beta0_ = beta0;
  return w;
}

ScreenWorldline ScreenWorldline::uniform_acceleration(double L, double g) {
  require_L(L);
  if (!std::isfinite(g)) throw ValidationError("screen acceleration must be finite");
  ScreenWorldline w;
  w.kind_ = WorldlineKind::uniform_acceleration;
  w.L_ = L;
  w.g_ = g;
  return w;
}

ScreenWorldline ScreenWorldline::tabulated(double L, std::vector<double> t, std::vector<double> z) {
  require_L(L);
  if (t.size() != z.size() || t.size() < 3) {
    throw ValidationError("tabulated worldline needs matching t and z arrays with at least 3 samples");
  }
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw ValidationError("tabulated worldline times must be strictly increasing");
  }
  ScreenWorldline w;
  w.kind_ = WorldlineKind::tabulated;
  w.L_ = L;
  const std::size_t n = t.size();
  // Natural cubic spline: tridiagonal solve for the knot second derivatives.
  std::vector<double> m2(n, 0.0), c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = t[i] - t[i - 1];
    const double h1 = t[i + 1] - t[i];
    const double rhs = 6.0 * ((z[i + 1] - z[i]) / h1 - (z[i] - z[i - 1]) / h0);
    const double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
    c[i] = h1 / diag;
    d[i] = (rhs - h0 * d[i - 1]) / diag;
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m2[i] = d[i] - c[i] * m2[i + 1];
  }
  w.t_ = std::move(t);
  w.z_ = std::move(z);
  w.m2_ = std::move(m2);
  w.t_min_ = w.t_.front();
  w.t_max_ = w.t_.back();
  // |beta| < 1 across the table, sampled densely per segment.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (int k = 0; k <= 16; ++k) {
      const double tt = w.t_[i] + (w.t_[i + 1] - w.t_[i]) * k / 16.0;
      if (!(std::abs(w.velocity(tt)) < 1.0)) {
        std::ostringstream msg;
        msg << "superluminal worldline: tabulated |beta| >= 1 near t = " << tt;
        throw NumericalError(msg.str());
      }
    }
  }
  return w;
}

ScreenWorldline& ScreenWorldline::set_validity(double t_min, double t_max) {
  if (!(t_max > t_min)) throw ValidationError("worldline validity interval is empty");
  if (kind_ == WorldlineKind::tabulated && (t_min < t_.front() || t_max > t_.back())) {
    throw ValidationError("tabulated worldline validity must lie within the table");
  }
  t_min_ = t_min;
  t_max_ = t_max;
  return *this;
}

ScreenWorldline ScreenWorldline::with_L(double L) const {
  require_L(L);
  ScreenWorldline w = *this;
  w.L_ = L;
  return w;
}

std::string ScreenWorldline::describe() const {
  std::ostringstream s;
  switch (kind_) {
    case WorldlineKind::rest:
      s << "rest";
      break;
    case WorldlineKind::uniform_velocity:
      s << "uniform-velocity(beta0=" << beta0_ << ")";
      break;
    case WorldlineKind::uniform_acceleration:
      s << "uniform-acceleration(g=" << g_ << ")";
      break;
    case WorldlineKind::tabulated:
      s << "tabulated(" << t_.size() << " samples)";
      break;
  }
  s << " L=" << L_;
  return s.str();
}

void ScreenWorldline::check(double t) const {
  if (!valid_at(t)) {
    std::ostringstream msg;
    msg << "time " << t << " outside worldline validity [" << t_min_ << ", " << t_max_ << "]";
    throw ValidationError(msg.str());
  }
}

std::size_t ScreenWorldline::segment(double t) const {
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  return std::min(i, t_.size() - 2);
}

double ScreenWorldline::z_of_t(double t) const {
  check(t);
  switch (kind_) {
    case WorldlineKind::rest:
      return 0.0;
    case WorldlineKind::uniform_velocity:
      return beta0_ * t;
    case WorldlineKind::uniform_acceleration:
      return 0.5 * g_ * t * t;
    case WorldlineKind::tabulated: {
      const std::size_t i = segment(t);
      const double h = t_[i + 1] - t_[i];
      const double a = (t_[i + 1] - t) / h;
      const double b = (t - t_[i]) / h;
      return a * z_[i] + b * z_[i + 1] +
             ((a * a * a - a) * m2_[i] + (b * b * b - b) * m2_[i + 1]) * h * h / 6.0;
    }
  }
  return 0.0;
}

double ScreenWorldline::velocity(double t) const {
  check(t);
  switch (kind_) {
    case WorldlineKind::rest:
      return 0.0;
    case WorldlineKind::uniform_velocity:
      return beta0_;
    case WorldlineKind::uniform_acceleration:
      return g_ * t;
    case WorldlineKind::tabulated: {
      const std::size_t i = segment(t);
      const double h = t_[i + 1] - t_[i];
      const double a = (t_[i + 1] - t) / h;
      const double b = (t - t_[i]) / h;
      return (z_[i + 1] - z_[i]) / h +
             (-(3.0 * a * a - 1.0) * m2_[i] + (3.0 * b * b - 1.0) * m2_[i + 1]) * h / 6.0;
    }
  }
  return 0.0;
}

double ScreenWorldline::lab_acceleration(double t) const {
  check(t);
  switch (kind_) {
    case WorldlineKind::rest:
    case WorldlineKind::uniform_velocity:
      return 0.0;
    case WorldlineKind::uniform_acceleration:
      return g_;
    case WorldlineKind::tabulated: {
      const std::size_t i = segment(t);
      const double h = t_[i + 1] - t_[i];
      const double b = (t - t_[i]) / h;
      return (1.0 - b) * m2_[i] + b * m2_[i + 1];
    }
  }
  return 0.0;
}

double ScreenWorldline::proper_time(double t) const {
  check(t);
  const double t0 = valid_at(0.0) ? 0.0 : t_min_;
  switch (kind_) {
    case WorldlineKind::rest:
      return t - t0;
    case WorldlineKind::uniform_velocity:
      return (t - t0) * std::sqrt(1.0 - beta0_ * beta0_);
    case WorldlineKind::uniform_acceleration: {
      auto F = [&](double s) {
        const double u = g_ * s;
        if (!(std::abs(u) < 1.0)) throw NumericalError("superluminal worldline");
        if (std::abs(u) < 1e-4) return s * (1.0 - u * u / 6.0 - u * u * u * u / 40.0);
        return (u * std::sqrt(1.0 - u * u) + std::asin(u)) / (2.0 * g_);
      };
      return F(t) - F(t0);
    }
    case WorldlineKind::tabulated: {
      static const QuadratureRule gl = gauss_legendre(8);
      auto integrate = [&](double a, double b) {
        double s = 0.0;
        for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
          const double tt = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[k];
          const double beta = velocity(tt);
          s += gl.weights[k] * std::sqrt(1.0 - beta * beta);
        }
        return 0.5 * (b - a) * s;
      };
      const double lo = std::min(t0, t);
      const double hi = std::max(t0, t);
      double total = 0.0;
      for (double a = lo; a < hi;) {
        const double b = std::min(hi, t_[segment(a) + 1]);
        total += integrate(a, b);
        a = b;
      }
      return t >= t0 ? total : -total;
    }
  }
  return 0.0;
}

double ScreenWorldline::coordinate_time(double tau) const {
  if (kind_ == WorldlineKind::rest) {
    const double t = tau + (valid_at(0.0) ? 0.0 : t_min_);
    check(t);
    return t;
  }
  // Bracket, then Newton with a bisection safeguard (dt/dtau = gamma >= 1).
  double lo = valid_at(0.0) ? 0.0 : t_min_;
  double hi = lo;
  const double f_lo0 = proper_time(lo) - tau;
  if (f_lo0 > 0.0) {
    lo = t_min_;
    if (proper_time(lo) - tau > 0.0) throw ValidationError("proper time before worldline validity");
  } else {
    double step = std::max(std::abs(tau), 1.0);
    hi = lo + step;
    while (true) {
      if (!std::isfinite(t_max_) || hi < t_max_) {
        const double hb = std::min(hi, t_max_);
        double f = 0.0;
        try {
          f = proper_time(hb) - tau;
        } catch (const NumericalError&) {
          hi = 0.5 * (lo + hb);
          step *= 0.5;
          if (step < kTimeTolerance) throw;
          continue;
        }
        if (f >= 0.0) {
          hi = hb;
          break;
        }
        lo = hb;
        step *= 2.0;
        hi = lo + step;
      } else {
        if (proper_time(t_max_) - tau < 0.0) {
          throw ValidationError("proper time beyond worldline validity");
        }
        hi = t_max_;
        break;
      }
    }
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = proper_time(t) - tau;
    if (f > 0.0) hi = t; else lo = t;
    const double beta = velocity(t);
    const double gamma = 1.0 / std::sqrt(1.0 - beta * beta);
    double next = t - f * gamma;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= kTimeTolerance * std::max(1.0, std::abs(t)) || hi - lo <= kTimeTolerance) {
      return next;
    }
    t = next;
  }
  throw NumericalError("coordinate_time did not converge");
}

double z_of_t(const ScreenWorldline& w, double t) { return w.z_of_t(t); }

BetaGamma beta_gamma(const ScreenWorldline& w, double t) {
  const double beta = w.velocity(t);
  if (!(std::abs(beta) < 1.0)) {
    std::ostringstream msg;
    msg << "superluminal worldline: beta = " << beta << " at t = " << t;
    throw NumericalError(msg.str());
  }
  return {beta, 1.0 / std::sqrt(1.0 - beta * beta)};
}

double proper_acceleration(const ScreenWorldline& w, double t) {
  const auto bg = beta_gamma(w, t);
  return bg.gamma * bg.gamma * bg.gamma * w.lab_acceleration(t);
}

Event proper_to_minkowski(const ScreenWorldline& w, const ProperFramePoint& p) {
  const double t_cs = w.coordinate_time(p.tau);
  const double a = proper_acceleration(w, t_cs);
  if (!(std::abs(a * p.Z) < 1.0)) {
    std::ostringstream msg;
    msg << "outside proper-frame patch: |g Z| = " << std::abs(a * p.Z) << " >= 1";
    throw ValidationError(msg.str());
  }
  const auto bg = beta_gamma(w, t_cs);
  return {t_cs + bg.beta * bg.gamma * p.Z, p.X, p.Y + w.L(), w.z_of_t(t_cs) + bg.gamma * p.Z};
}

}  // namespace mwi
