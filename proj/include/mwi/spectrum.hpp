#pragma once

#include <string>
#include <vector>

#include "mwi/wavepacket.hpp"

namespace mwi {

enum class SpectrumKind { discrete, gaussian, thermal };

/// Internal-state mass distribution P_m. Continuous kinds are carried as
/// Gauss-Hermite nodes so every consumer can treat them as weighted species.
class MassSpectrum {
 public:
  static MassSpectrum discrete(std::vector<Species> species);
  static MassSpectrum gaussian(double mean, double sd, std::size_t nodes = 32);
  /// N oscillators at temperature kT above rest mass m0: mean m0 + N kT,
  /// standard deviation kT sqrt(N).
  static MassSpectrum thermal(double m0, double n_oscillators, double kT, std::size_t nodes = 32);

  SpectrumKind kind() const { return kind_; }
  bool continuous() const { return kind_ != SpectrumKind::discrete; }
  const std::vector<Species>& nodes() const { return nodes_; }
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double sd() const;
  double min_mass() const;
  double max_mass() const;
  /// Standard-normal abscissa of each node (continuous kinds only).
  const std::vector<double>& standard_nodes() const { return standard_; }
  std::string describe() const;

  double m0() const { return m0_; }
  double n_oscillators() const { return n_; }
  double kT() const { return kT_; }

 private:
  SpectrumKind kind_ = SpectrumKind::discrete;
  std::vector<Species> nodes_;
  std::vector<double> standard_;
  double mean_ = 0.0;
  double variance_ = 0.0;
  double m0_ = 0.0;
  double n_ = 0.0;
  double kT_ = 0.0;

  void finish_continuous(double mean, double sd, std::size_t count);
};

}  // namespace mwi
