#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "mwi/errors.hpp"
#include "mwi/labframe.hpp"
#include "mwi/visibility.hpp"
#include "oracles.hpp"

using namespace mwi;

namespace {

InitialState gaussian_state() {
  InitialState ini;
  ini.kind = ProfileKind::gaussian;
  ini.gaussian = {0.0, 1.0};
  ini.z_grid = {4096, 100.0, 0.0};
  return ini;
}

}  // namespace

TEST_CASE("Heisenberg mean") {
  HeisenbergTrajectory tr{{1.0, 2.0, 3.0}, {0.5, 0.0, -1.0}, 2.0, GravityModel::eep({0.0, 0.0, 0.1})};
  const auto x = heisenberg_mean(tr, 4.0);
  CHECK(x[0] == doctest::Approx(2.0));
  CHECK(x[1] == doctest::Approx(2.0));
  CHECK(x[2] == doctest::Approx(3.0 - 2.0 - 0.8));
  CHECK_THROWS_AS(heisenberg_mean(tr, -1.0), ValidationError);
}

TEST_CASE("lab evolution of a Gaussian matches the displaced closed form") {
  const auto psi0 = sample_initial_state(gaussian_state());
  const Species s{1000.0, 1.0};
  const double g = 1e-3, t = 80.0;
  const auto model = GravityModel::eep({0.0, 0.0, g});
  const HeisenbergTrajectory tr{{}, {}, s.mass, model};
  double worst_ehrenfest = 0.0;
  LabEvolutionOptions opt;
  opt.observer = [&](double tt, const WavefunctionGrid& psi) {
    const auto& ax = psi.axes()[0];
    const auto m = moments(psi.marginal('z'), ax.origin, ax.spacing);
    worst_ehrenfest = std::max(worst_ehrenfest, std::abs(m.mean - heisenberg_mean(tr, tt)[2]) / m.rms);
  };
  const auto psi = evolve_packet_lab(psi0, s, model, t, opt);
  CHECK(worst_ehrenfest <= 1e-3);
  CHECK(std::abs(psi.norm() - 1.0) <= 1e-9);
  const auto& ax = psi.axes()[0];
  double worst = 0.0;
  for (std::size_t i = 0; i < ax.points; ++i) {
    const double ref = oracle::forced_gaussian_density(ax.coordinate(i), 0.0, 1.0, 0.0, s.mass, -s.mass * g, t);
    worst = std::max(worst, std::abs(std::norm(psi.values()[i]) - ref));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("zero force reduces to free propagation") {
  const auto psi0 = sample_initial_state(gaussian_state());
  const Species s{1000.0, 1.0};
  const auto a = evolve_packet_lab(psi0, s, GravityModel::eep({0.0, 0.0, 0.0}), 300.0);
  const auto b = fresnel_propagate(psi0, s.mass, 300.0);
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  CHECK(d < 1e-10);
}

TEST_CASE("species fall together under eep and apart otherwise") {
  const auto spec = MassSpectrum::discrete({{1000.0, 0.5}, {1100.0, 0.5}});
  const double g = 1e-3, t = 50.0;
  const auto eep = eep_violation_separation(spec, GravityModel::eep({0.0, 0.0, g}), t);
  CHECK(std::abs(eep[0] - eep[1]) <= 1e-12);
  CHECK(eep[0] == doctest::Approx(-0.5 * g * t * t));

  const auto viol = GravityModel::violating({{1000.0, {0.0, 0.0, -1000.0 * g * 0.95}},
                                             {1100.0, {0.0, 0.0, -1100.0 * g * 1.05}}});
  const auto sep = eep_violation_separation(spec, viol, t);
  CHECK(std::abs((sep[0] - sep[1]) - 0.5 * g * 0.1 * t * t) <= 1e-12);

  const auto psi0 = sample_initial_state(gaussian_state());
  for (const auto& sp : spec.nodes()) {
    const auto psi = evolve_packet_lab(psi0, sp, viol, t);
    const auto& ax = psi.axes()[0];
    const auto m = moments(psi.marginal('z'), ax.origin, ax.spacing);
    const double expected = 0.5 * viol.force(sp.mass)[2] / sp.mass * t * t;
    CHECK(std::abs(m.mean - expected) <= ax.spacing);
  }
  CHECK_THROWS_AS(viol.force(1234.0), ValidationError);
}

TEST_CASE("lab evolution preconditions") {
  const auto psi0 = sample_initial_state(gaussian_state());
  const Species s{1000.0, 1.0};
  InitialState low = gaussian_state();
  low.gaussian.center = -4.0;
  low.z_grid = {512, 12.8, 0.0};
  CHECK_THROWS_WITH(evolve_packet_lab(sample_initial_state(low), s, GravityModel::eep({0.0, 0.0, 1e-3}), 80.0),
                    doctest::Contains("packet leaves the lab grid"));
  CHECK_THROWS_WITH(evolve_packet_lab(psi0, s, GravityModel::eep({0.0, 0.0, 1e-3}), 99.0),
                    doctest::Contains("non-relativistic"));
  LabEvolutionOptions few;
  few.max_steps = 4;
  few.tolerance = 0.0;
  CHECK_THROWS_WITH(evolve_packet_lab(psi0, s, GravityModel::eep({0.0, 0.0, 1e-3}), 50.0, few),
                    doctest::Contains("step count too low"));
  CHECK_THROWS_AS(evolve_packet_lab(psi0, {10.0, 1.0}, GravityModel::eep({0.0, 0.0, 0.0}), 1.0),
                  ValidationError);
}

TEST_CASE("lab pattern without gravity equals the rest-screen pattern") {
  InitialState ini;
  ini.k0 = 200.0;
  ini.z_grid = {1u << 15, 200.0, 0.0};
  const double L = 100.0;
  const auto spec = MassSpectrum::discrete({{2e4, 0.5}, {2.2e4, 0.5}});
  LabPatternOptions lo;
  lo.grid = PatternGrid{-10.0, 20.0 / 1023.0, 1024};
  const auto lab = lab_pattern(ini, spec, GravityModel::eep({0.0, 0.0, 0.0}), L, lo);
  SimulationOptions so;
  so.grid = lo.grid;
  const auto rest = simulate_pattern(ini, spec, ScreenWorldline::rest(L), so);
  double sq = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < lab.total.size(); ++i) {
    sq += std::pow(lab.total[i] - rest.total[i], 2);
    peak = std::max(peak, rest.total[i]);
  }
  CHECK(std::sqrt(sq / lab.total.size()) <= 1e-2 * peak);
  CHECK(lab.method == PatternMethod::lab_frame);
}

TEST_CASE("frame equivalence report") {
  InitialState ini;
  ini.k0 = 200.0;
  ini.z_grid = {1u << 15, 200.0, 0.0};
  const auto spec = MassSpectrum::discrete({{2e4, 0.5}, {2.01e4, 0.5}});
  const auto r = frame_equivalence_check(ini, spec, 2e-7, 100.0);
  CHECK(r.pass);
  CHECK(r.rms_pattern_diff <= 0.01);
  CHECK(r.delta_visibility <= 0.01);
  const auto j = nlohmann::json::parse(frame_equivalence_json(r));
  CHECK(j.contains("rms_pattern_diff"));
  CHECK(j.contains("delta_visibility"));
  CHECK(j["pass"].get<bool>());
  CHECK(j.contains("parameters"));
  const auto viol = GravityModel::violating({{2e4, {0.0, 0.0, -1.0}}, {2.01e4, {0.0, 0.0, -1.0}}});
  CHECK_THROWS_AS(frame_equivalence_check(ini, spec, viol, 100.0), ValidationError);
  CHECK_THROWS_AS(frame_equivalence_check(ini, spec, GravityModel::eep({1e-7, 0.0, 2e-7}), 100.0),
                  ValidationError);
}
