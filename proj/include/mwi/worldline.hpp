#pragma once

#include <limits>
#include <string>
#include <vector>

namespace mwi {

enum class WorldlineKind { rest, uniform_velocity, uniform_acceleration, tabulated };

/// Point in the proper reference frame of the central pixel.
struct ProperFramePoint {
  double tau = 0.0;
  double X = 0.0;
  double Y = 0.0;
  double Z = 0.0;
};

/// Minkowski event (t, x, y, z).
struct Event {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Transverse trajectory of the screen's central pixel, z~(t), with the
/// screen plane at y = L.
class ScreenWorldline {
 public:
  static ScreenWorldline rest(double L);
  static ScreenWorldline uniform_velocity(double L, double beta0);
  /// Lab law z~(t) = g t^2 / 2.
  static ScreenWorldline uniform_acceleration(double L, double g);
  /// Natural cubic spline through (t_i, z_i); t strictly increasing.
  static ScreenWorldline tabulated(double L, std::vector<double> t, std::vector<double> z);

  WorldlineKind kind() const { return kind_; }
  double L() const { return L_; }
  double beta0() const { return beta0_; }
  double g() const { return g_; }
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  /// Restricts the coordinate-time validity interval.
  ScreenWorldline& set_validity(double t_min, double t_max);
  ScreenWorldline with_L(double L) const;
  std::string describe() const;

  bool valid_at(double t) const { return t >= t_min_ && t <= t_max_; }

  double z_of_t(double t) const;
  /// dz~/dt.
  double velocity(double t) const;
  /// d^2 z~/dt^2.
  double lab_acceleration(double t) const;

  /// Proper time elapsed on the central pixel since t = 0.
  double proper_time(double t) const;
  /// Inverse of proper_time, solved to 1e-12 in t.
  double coordinate_time(double tau) const;

 private:
  WorldlineKind kind_ = WorldlineKind::rest;
  double L_ = 0.0;
  double beta0_ = 0.0;
  double g_ = 0.0;
  double t_min_ = 0.0;
  double t_max_ = std::numeric_limits<double>::infinity();
  std::vector<double> t_;
  std::vector<double> z_;
  std::vector<double> m2_;  // spline second derivatives at knots

  void check(double t) const;
  std::size_t segment(double t) const;
};

struct BetaGamma {
  double beta = 0.0;
  double gamma = 1.0;
};

double z_of_t(const ScreenWorldline& w, double t);
/// Throws NumericalError("superluminal worldline") when |beta| >= 1.
BetaGamma beta_gamma(const ScreenWorldline& w, double t);
/// gamma^3 dbeta/dt, the acceleration measured in the instantaneous rest frame.
double proper_acceleration(const ScreenWorldline& w, double t);
/// [t_cs + beta gamma Z, X, Y + L, z_cs + gamma Z] at the pixel's proper time tau.
Event proper_to_minkowski(const ScreenWorldline& w, const ProperFramePoint& p);

}  // namespace mwi
