#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mwi/errors.hpp"
#include "mwi/labframe.hpp"
#include "mwi/measurement.hpp"
#include "mwi/scenario.hpp"
#include "mwi/visibility.hpp"

namespace py = pybind11;
using namespace mwi;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::dict grid_to_dict(const WavefunctionGrid& g) {
  py::dict d;
  const auto& a = g.axes()[0];
  std::vector<double> z(a.points);
  for (std::size_t i = 0; i < a.points; ++i) z[i] = a.coordinate(i);
  py::array_t<std::complex<double>> psi(static_cast<py::ssize_t>(g.size()));
  std::copy(g.values().begin(), g.values().end(), psi.mutable_data());
  d["z"] = to_array(z);
  d["psi"] = psi;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Matter-wave interferometry with internal mass spectra";

  static py::exception<ValidationError> validation_error(m, "ValidationError", PyExc_ValueError);
  static py::exception<NumericalError> numerical_error(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      py::set_error(validation_error, e.what());
    } catch (const NumericalError& e) {
      py::set_error(numerical_error, e.what());
    }
  });

  py::class_<Species>(m, "Species")
      .def(py::init<double, double>(), py::arg("mass"), py::arg("weight") = 1.0)
      .def_readwrite("mass", &Species::mass)
      .def_readwrite("weight", &Species::weight)
      .def("__repr__", [](const Species& s) {
        return "Species(mass=" + std::to_string(s.mass) + ", weight=" + std::to_string(s.weight) + ")";
      });

  py::class_<InitialState>(m, "InitialState")
      .def(py::init<>())
      .def_static(
          "double_slit",
          [](double z1, double z2, double epsilon, double k0, double width_x, double width_y,
             std::size_t points, double extent) {
            InitialState s;
            s.kind = ProfileKind::double_slit;
            s.slit = {z1, z2, epsilon};
            s.k0 = k0;
            s.width_x = width_x;
            s.width_y = width_y;
            s.z_grid = {points, extent, 0.0};
            s.validate();
            return s;
          },
          py::arg("z1"), py::arg("z2"), py::arg("epsilon"), py::arg("k0"), py::arg("width_x") = 1.0,
          py::arg("width_y") = 1.0, py::arg("points") = 32768, py::arg("extent") = 200.0)
      .def_static(
          "gaussian",
          [](double center, double width, double k0, double width_x, double width_y, std::size_t points,
             double extent) {
            InitialState s;
            s.kind = ProfileKind::gaussian;
            s.gaussian = {center, width};
            s.k0 = k0;
            s.width_x = width_x;
            s.width_y = width_y;
            s.z_grid = {points, extent, 0.0};
            s.validate();
            return s;
          },
          py::arg("center"), py::arg("width"), py::arg("k0"), py::arg("width_x") = 1.0,
          py::arg("width_y") = 1.0, py::arg("points") = 32768, py::arg("extent") = 200.0)
      .def_readwrite("k0", &InitialState::k0)
      .def("packet_size", &InitialState::packet_size);

  py::class_<MassSpectrum>(m, "MassSpectrum")
      .def_static("discrete", &MassSpectrum::discrete, py::arg("species"))
      .def_static("gaussian", &MassSpectrum::gaussian, py::arg("mean"), py::arg("sd"), py::arg("nodes") = 32)
      .def_static("thermal", &MassSpectrum::thermal, py::arg("m0"), py::arg("N"), py::arg("kT"),
                  py::arg("nodes") = 32)
      .def_property_readonly("mean", &MassSpectrum::mean)
      .def_property_readonly("variance", &MassSpectrum::variance)
      .def_property_readonly("sd", &MassSpectrum::sd)
      .def_property_readonly("nodes", &MassSpectrum::nodes)
      .def("__repr__", &MassSpectrum::describe);

  py::class_<ScreenWorldline>(m, "ScreenWorldline")
      .def_static("rest", &ScreenWorldline::rest, py::arg("L"))
      .def_static("uniform_velocity", &ScreenWorldline::uniform_velocity, py::arg("L"), py::arg("beta0"))
      .def_static("uniform_acceleration", &ScreenWorldline::uniform_acceleration, py::arg("L"), py::arg("g"))
      .def_static("tabulated", &ScreenWorldline::tabulated, py::arg("L"), py::arg("t"), py::arg("z"))
      .def_property_readonly("L", &ScreenWorldline::L)
      .def("z_of_t", &ScreenWorldline::z_of_t)
      .def("proper_time", &ScreenWorldline::proper_time)
      .def("coordinate_time", &ScreenWorldline::coordinate_time)
      .def("__repr__", &ScreenWorldline::describe);

  m.def("beta_gamma", [](const ScreenWorldline& w, double t) {
    const auto bg = beta_gamma(w, t);
    return py::make_tuple(bg.beta, bg.gamma);
  });
  m.def("proper_acceleration", &proper_acceleration);
  m.def("proper_to_minkowski", [](const ScreenWorldline& w, double tau, double X, double Y, double Z) {
    const Event e = proper_to_minkowski(w, {tau, X, Y, Z});
    return py::make_tuple(e.t, e.x, e.y, e.z);
  });

  m.def("arrival_time", &arrival_time, py::arg("mass"), py::arg("k0"), py::arg("L"));
  m.def("final_packet", [](const InitialState& ini, double L) { return grid_to_dict(final_packet(ini, L)); },
        py::arg("initial"), py::arg("L"));
  m.def(
      "evolve",
      [](const InitialState& ini, double mass, double t) {
        return grid_to_dict(kspace_evolve(*z_momentum_amplitudes(ini), mass, t));
      },
      py::arg("initial"), py::arg("mass"), py::arg("t"));

  py::class_<Pattern>(m, "Pattern")
      .def_property_readonly("Z", [](const Pattern& p) { return to_array(p.Z()); })
      .def_property_readonly("total", [](const Pattern& p) { return to_array(p.total); })
      .def_property_readonly("species", [](const Pattern& p) { return p.species; })
      .def_property_readonly("per_species", [](const Pattern& p) {
        py::list out;
        for (const auto& s : p.per_species) out.append(to_array(s));
        return out;
      })
      .def_property_readonly("method", [](const Pattern& p) { return to_string(p.method); })
      .def("to_csv", &pattern_csv)
      .def("to_json", &pattern_json);

  m.def(
      "simulate_pattern",
      [](const InitialState& ini, const MassSpectrum& s, const ScreenWorldline& w, const std::string& method,
         std::size_t points) {
        SimulationOptions o;
        if (method == "shifted") o.method = PatternMethod::shifted_pattern;
        else if (method == "full") o.method = PatternMethod::full_flux;
        else throw ValidationError("method must be 'shifted' or 'full'");
        o.grid_points = points;
        py::gil_scoped_release release;
        return simulate_pattern(ini, s, w, o);
      },
      py::arg("initial"), py::arg("spectrum"), py::arg("screen"), py::arg("method") = "shifted",
      py::arg("points") = 2048);

  m.def(
      "lab_pattern",
      [](const InitialState& ini, const MassSpectrum& s, double g, double L, std::optional<double> u) {
        LabPatternOptions o;
        o.screen_z_velocity = u;
        py::gil_scoped_release release;
        return lab_pattern(ini, s, GravityModel::eep({0.0, 0.0, g}), L, o);
      },
      py::arg("initial"), py::arg("spectrum"), py::arg("g"), py::arg("L"),
      py::arg("screen_z_velocity") = py::none());

  py::class_<VisibilityReport>(m, "VisibilityReport")
      .def_readonly("visibility", &VisibilityReport::visibility)
      .def_readonly("phase", &VisibilityReport::phase)
      .def_property_readonly("method", [](const VisibilityReport& r) { return to_string(r.method); });

  m.def(
      "fit_visibility",
      [](const std::vector<double>& Z, const std::vector<double>& sigma, double alpha) {
        return fit_visibility(Z, sigma, alpha);
      },
      py::arg("Z"), py::arg("sigma"), py::arg("alpha"));
  m.def("fringe_wavenumber", [](double k0, double z1, double z2, double L) {
    return FringeModel::double_slit(k0, z1, z2, L).alpha;
  });
  m.def("double_slit_dephasing", &double_slit_dephasing, py::arg("spectrum"), py::arg("g"), py::arg("t"),
        py::arg("z1"), py::arg("z2"));
  m.def("phasor_visibility", &phasor_visibility, py::arg("spectrum"), py::arg("phases"));
  m.def("proper_time_visibility", &proper_time_visibility, py::arg("spectrum"), py::arg("dtau"));
  m.def("double_slit_short_time", &double_slit_short_time, py::arg("g"), py::arg("dz"), py::arg("dm"),
        py::arg("t"));
  m.def("thermal_decoherence_time", &thermal_decoherence_time, py::arg("N"), py::arg("kT"), py::arg("g"),
        py::arg("dz"));
  m.def(
      "find_revival",
      [](const MassSpectrum& s, double k0, double z1, double z2, double g, double L) -> py::object {
        const auto fr = FringeModel::double_slit(k0, z1, z2, L);
        const auto r = find_revival(s, fr, ScreenWorldline::uniform_acceleration(L, g), k0, L);
        if (r.always_visible) return py::none();
        return py::float_(r.time);
      },
      py::arg("spectrum"), py::arg("k0"), py::arg("z1"), py::arg("z2"), py::arg("g"), py::arg("L"));

  m.def(
      "frame_equivalence_check",
      [](const InitialState& ini, const MassSpectrum& s, double g, double L) {
        FrameEquivalenceReport r;
        {
          py::gil_scoped_release release;
          r = frame_equivalence_check(ini, s, g, L);
        }
        py::dict d;
        d["rms_pattern_diff"] = r.rms_pattern_diff;
        d["delta_visibility"] = r.delta_visibility;
        d["v_lab"] = r.v_lab;
        d["v_lorentz"] = r.v_lorentz;
        d["pass"] = r.pass;
        return d;
      },
      py::arg("initial"), py::arg("spectrum"), py::arg("g"), py::arg("L"));

  m.def(
      "run_scenario",
      [](const std::filesystem::path& path, const std::filesystem::path& output_dir,
         const std::vector<std::string>& overrides) {
        const auto s = load_scenario(path, overrides);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(s, output_dir);
        }
        return py::make_tuple(r.summary, r.files);
      },
      py::arg("path"), py::arg("output_dir"), py::arg("overrides") = std::vector<std::string>{});
}
