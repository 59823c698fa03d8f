#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mwi/measurement.hpp"
#include "mwi/spectrum.hpp"
#include "mwi/worldline.hpp"

namespace mwi {

/// |psi_fin^z|^2 ~ C [1 + V cos(alpha z + phi)].
struct FringeModel {
  double C = 1.0;
  double V = 1.0;
  double alpha = 1.0;
  double phi = 0.0;

  /// alpha = k0 |z1 - z2| / L, unit contrast.
  static FringeModel double_slit(double k0, double z1, double z2, double L);
};

enum class VisibilityMethod { fit, short_time, phasor };
std::string to_string(VisibilityMethod m);

struct VisibilityReport {
  double visibility = 0.0;
  double phase = 0.0;
  VisibilityMethod method = VisibilityMethod::phasor;
  double t_eval = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::string spectrum;
};

/// Fringe contrast and phase at the pattern centroid from a least-squares
/// split of sigma(Z) into a baseband part P and a sideband C exp(i alpha Z),
/// both band-limited below alpha / 2.
VisibilityReport fit_visibility(const Pattern& p, double alpha);
VisibilityReport fit_visibility(const std::vector<double>& Z, const std::vector<double>& sigma,
                                double alpha);
/// Dominant fringe wavenumber of a pattern: peak of the tapered power
/// spectrum.
double estimate_fringe_wavenumber(const Pattern& p);

/// delta phi_m = alpha z~'(t_mbar) (mbar - m) L / k0 for each spectrum node.
std::vector<double> dephasing_phase(const MassSpectrum& s, const FringeModel& fringe,
                                    const ScreenWorldline& w, double k0, double L);
/// g t (mbar - m)(z2 - z1) for each spectrum node.
std::vector<double> double_slit_dephasing(const MassSpectrum& s, double g, double t, double z1,
                                          double z2);

/// |<exp(i delta phi)>| and its argument.
VisibilityReport phasor_visibility(const MassSpectrum& s, const std::vector<double>& phases);

/// Quadratic expansion in the mass spread about t_mbar. Throws
/// ValidationError("use phasor_visibility") once the correction reaches 0.5.
VisibilityReport short_time_visibility(const MassSpectrum& s, const FringeModel& fringe,
                                       const ScreenWorldline& w, double t_mbar);
/// 1 - (g dz dm)^2 t^2 / 2, same validity rule.
double double_slit_short_time(double g, double dz, double dm, double t);

/// sqrt(2/N) / (kT g |dz|).
double thermal_decoherence_time(double n_oscillators, double kT, double g, double dz);

struct Revival {
  double time = 0.0;
  /// Single distinct mass or no dephasing: visible at every time.
  bool always_visible = false;
};

/// Smallest t_mbar > 0 realigning every pairwise phase modulo 2 pi.
Revival find_revival(const MassSpectrum& s, const FringeModel& fringe, const ScreenWorldline& w,
                     double k0, double L);

/// |<exp(i (m - mbar) dtau)>|.
VisibilityReport proper_time_visibility(const MassSpectrum& s, double dtau);

struct CurveRow {
  double t = 0.0;
  double v_fit = std::numeric_limits<double>::quiet_NaN();
  double v_short = std::numeric_limits<double>::quiet_NaN();
  double v_phasor = std::numeric_limits<double>::quiet_NaN();
  double phi = std::numeric_limits<double>::quiet_NaN();
};
std::string visibility_curve_csv(const std::vector<CurveRow>& rows);

}  // namespace mwi
