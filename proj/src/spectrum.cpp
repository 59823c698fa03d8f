#include "mwi/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mwi/errors.hpp"
#include "mwi/quadrature.hpp"

namespace mwi {
namespace {

void check_perturbative(double mean, double sd) {
  if (!(sd / mean < 0.1)) {
    std::ostringstream msg;
    msg << "mass spread dm/m = " << sd / mean << " outside the perturbative regime (< 0.1)";
    throw ValidationError(msg.str());
  }
}

}  // namespace

MassSpectrum MassSpectrum::discrete(std::vector<Species> species) {
  if (species.empty()) throw ValidationError("spectrum needs at least one species");
  double total = 0.0;
  for (std::size_t i = 0; i < species.size(); ++i) {
    const auto& s = species[i];
    if (!(s.mass > 0.0)) {
      std::ostringstream msg;
      msg << "spectrum.species[" << i << "].mass must be positive (got " << s.mass << ")";
      throw ValidationError(msg.str());
    }
    if (!(s.weight >= 0.0 && s.weight <= 1.0)) {
      std::ostringstream msg;
      msg << "spectrum.species[" << i << "].weight must lie in [0, 1] (got " << s.weight << ")";
      throw ValidationError(msg.str());
    }
    total += s.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "weights must sum to 1 (sum = " << total << ")";
    throw ValidationError(msg.str());
  }
  MassSpectrum s;
  s.kind_ = SpectrumKind::discrete;
  s.nodes_ = std::move(species);
  double mean = 0.0;
  for (const auto& sp : s.nodes_) mean += sp.weight * sp.mass;
  double var = 0.0;
  for (const auto& sp : s.nodes_) var += sp.weight * (sp.mass - mean) * (sp.mass - mean);
  s.mean_ = mean;
  s.variance_ = var;
  check_perturbative(mean, std::sqrt(var));
  return s;
}

void MassSpectrum::finish_continuous(double mean, double sd, std::size_t count) {
  if (!(mean > 0.0)) throw ValidationError("spectrum mean mass must be positive");
  if (!(sd >= 0.0)) throw ValidationError("spectrum width must be non-negative");
  check_perturbative(mean, sd);
  const auto rule = gauss_hermite_normal(count);
  mean_ = mean;
  variance_ = sd * sd;
  standard_ = rule.nodes;
  nodes_.clear();
  for (std::size_t i = 0; i < count; ++i) {
    const double m = mean + sd * rule.nodes[i];
    if (!(m > 0.0)) {
      throw ValidationError("quadrature node has non-positive mass; reduce nodes or the spread");
    }
    nodes_.push_back({m, rule.weights[i]});
  }
}

MassSpectrum MassSpectrum::gaussian(double mean, double sd, std::size_t nodes) {
  MassSpectrum s;
  s.kind_ = SpectrumKind::gaussian;
  s.finish_continuous(mean, sd, nodes);
  return s;
}

MassSpectrum MassSpectrum::thermal(double m0, double n_oscillators, double kT, std::size_t nodes) {
  if (!(m0 > 0.0)) throw ValidationError("spectrum.m0 must be positive");
  if (!(n_oscillators > 0.0)) throw ValidationError("spectrum.N must be positive");
  if (!(kT > 0.0)) throw ValidationError("spectrum.kT must be positive");
  MassSpectrum s;
  s.kind_ = SpectrumKind::thermal;
  s.m0_ = m0;
  s.n_ = n_oscillators;
  s.kT_ = kT;
  s.finish_continuous(m0 + n_oscillators * kT, kT * std::sqrt(n_oscillators), nodes);
  return s;
}

double MassSpectrum::sd() const { return std::sqrt(variance_); }

double MassSpectrum::min_mass() const {
  return std::min_element(nodes_.begin(), nodes_.end(),
                          [](const Species& a, const Species& b) { return a.mass < b.mass; })
      ->mass;
}

double MassSpectrum::max_mass() const {
  return std::max_element(nodes_.begin(), nodes_.end(),
                          [](const Species& a, const Species& b) { return a.mass < b.mass; })
      ->mass;
}

std::string MassSpectrum::describe() const {
  std::ostringstream s;
  s.precision(12);
  switch (kind_) {
    case SpectrumKind::discrete:
      s << "discrete(";
      for (std::size_t i = 0; i < nodes_.size(); ++i) {
        s << (i ? ", " : "") << nodes_[i].mass << ":" << nodes_[i].weight;
      }
      s << ")";
      break;
    case SpectrumKind::gaussian:
      s << "gaussian(mean=" << mean_ << ", sd=" << sd() << ", nodes=" << nodes_.size() << ")";
      break;
    case SpectrumKind::thermal:
      s << "thermal(m0=" << m0_ << ", N=" << n_ << ", kT=" << kT_ << ", nodes=" << nodes_.size() << ")";
      break;
  }
  return s.str();
}

}  // namespace mwi
