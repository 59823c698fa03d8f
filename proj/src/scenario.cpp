#include "mwi/scenario.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <fstream>
#include <functional>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "json.hpp"
#include "mwi/errors.hpp"
#include "mwi/visibility.hpp"

namespace mwi {
namespace fs = std::filesystem;

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::pattern:
      return "pattern";
    case Experiment::visibility_curve:
      return "visibility-curve";
    case Experiment::revival:
      return "revival";
    case Experiment::tau_dec:
      return "tau-dec";
    case Experiment::frame_equivalence:
      return "frame-equivalence";
  }
  return "unknown";
}

std::vector<double> SweepSpec::times() const {
  std::vector<double> t;
  if (points == 1) return {t_start};
  for (std::size_t i = 0; i < points; ++i) {
    t.push_back(t_start + (t_stop - t_start) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  return t;
}

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Collects every problem instead of stopping at the first one.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& why) { errors.push_back(path + ": " + why); }

  bool map(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!n.IsMap()) {
      fail(path.empty() ? "<root>" : path, "expected a mapping");
      return false;
    }
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) fail(join(path, key), "unknown key");
    }
    return true;
  }

  std::optional<double> number(const YAML::Node& parent, const std::string& path, const char* key,
                               bool required) {
    const auto n = parent[key];
    if (!n) {
      if (required) fail(join(path, key), "required");
      return std::nullopt;
    }
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) {
        fail(join(path, key), "must be finite");
        return std::nullopt;
      }
      return v;
    } catch (const YAML::Exception&) {
      fail(join(path, key), "expected a number");
      return std::nullopt;
    }
  }

  std::optional<double> positive(const YAML::Node& parent, const std::string& path, const char* key,
                                 bool required) {
    auto v = number(parent, path, key, required);
    if (v && !(*v > 0.0)) {
      std::ostringstream msg;
      msg << "must be positive (got " << *v << ")";
      fail(join(path, key), msg.str());
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::size_t> count(const YAML::Node& parent, const std::string& path, const char* key,
                                   bool required) {
    auto v = number(parent, path, key, required);
    if (!v) return std::nullopt;
    if (!(*v >= 1.0) || std::floor(*v) != *v) {
      fail(join(path, key), "must be a positive integer");
      return std::nullopt;
    }
    return static_cast<std::size_t>(*v);
  }

  std::optional<std::string> text(const YAML::Node& parent, const std::string& path, const char* key,
                                  bool required) {
    const auto n = parent[key];
    if (!n) {
      if (required) fail(join(path, key), "required");
      return std::nullopt;
    }
    if (!n.IsScalar()) {
      fail(join(path, key), "expected a string");
      return std::nullopt;
    }
    return n.as<std::string>();
  }

  std::optional<std::vector<double>> numbers(const YAML::Node& parent, const std::string& path,
                                             const char* key, bool required) {
    const auto n = parent[key];
    if (!n) {
      if (required) fail(join(path, key), "required");
      return std::nullopt;
    }
    if (!n.IsSequence()) {
      fail(join(path, key), "expected a list of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
      try {
        out.push_back(n[i].as<double>());
      } catch (const YAML::Exception&) {
        fail(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
        return std::nullopt;
      }
    }
    return out;
  }

  // Runs a constructor that may throw a module error, recording it at path.
  template <class F>
  bool guard(const std::string& path, F&& f) {
    try {
      f();
      return true;
    } catch (const Error& e) {
      fail(path, e.what());
      return false;
    }
  }
};

void apply_override(YAML::Node& root, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("--override expects key=value (got '" + item + "')");
  }
  const std::string key = item.substr(0, eq);
  const std::string value = item.substr(eq + 1);
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string p; std::getline(ss, p, '.');) {
    if (p.empty()) throw ValidationError("--override key has an empty path segment: '" + key + "'");
    parts.push_back(p);
  }
  // Assignment through operator[] rebinds nodes in yaml-cpp, so walk by
  // recursion and assign at each level.
  // Numeric segments index into existing sequences.
  std::function<void(YAML::Node, std::size_t)> set = [&](YAML::Node node, std::size_t i) {
    if (node.IsSequence()) {
      const auto& p = parts[i];
      if (p.find_first_not_of("0123456789") != std::string::npos || std::stoul(p) >= node.size()) {
        throw ValidationError("--override index '" + p + "' out of range in '" + key + "'");
      }
      YAML::Node child = node[std::stoul(p)];
      if (i + 1 == parts.size()) {
        node[std::stoul(p)] = YAML::Load(value);
        return;
      }
      set(child, i + 1);
      return;
    }
    if (i + 1 == parts.size()) {
      node[parts[i]] = YAML::Load(value);
      return;
    }
    if (!node[parts[i]] || !(node[parts[i]].IsMap() || node[parts[i]].IsSequence())) {
      node[parts[i]] = YAML::Node(YAML::NodeType::Map);
    }
    set(node[parts[i]], i + 1);
  };
  set(root, 0);
}

std::optional<ScreenWorldline> read_screen(Reader& r, const YAML::Node& n) {
  const std::string path = "screen";
  if (!r.map(n, path, {"kind", "g", "beta0", "t", "z", "validity"})) return std::nullopt;
  const auto kind = r.text(n, path, "kind", true);
  if (!kind) return std::nullopt;
  std::optional<ScreenWorldline> w;
  const double L = 1.0;  // replaced per run
  if (*kind == "rest") {
    w = ScreenWorldline::rest(L);
  } else if (*kind == "uniform-velocity") {
    auto b = r.number(n, path, "beta0", true);
    if (b) r.guard(join(path, "beta0"), [&] { w = ScreenWorldline::uniform_velocity(L, *b); });
  } else if (*kind == "uniform-acceleration") {
    auto g = r.number(n, path, "g", true);
    if (g) r.guard(join(path, "g"), [&] { w = ScreenWorldline::uniform_acceleration(L, *g); });
  } else if (*kind == "tabulated") {
    auto t = r.numbers(n, path, "t", true);
    auto z = r.numbers(n, path, "z", true);
    if (t && z) r.guard(path, [&] { w = ScreenWorldline::tabulated(L, *t, *z); });
  } else {
    r.fail(join(path, "kind"), "expected rest, uniform-velocity, uniform-acceleration or tabulated");
  }
  if (w && n["validity"]) {
    auto v = r.numbers(n, path, "validity", false);
    if (v && v->size() != 2) {
      r.fail(join(path, "validity"), "expected [t_min, t_max]");
    } else if (v) {
      r.guard(join(path, "validity"), [&] { w->set_validity((*v)[0], (*v)[1]); });
    }
  }
  return w;
}

std::optional<MassSpectrum> read_spectrum(Reader& r, const YAML::Node& n) {
  const std::string path = "spectrum";
  if (!r.map(n, path, {"kind", "species", "mean", "sd", "m0", "N", "kT", "nodes"})) return std::nullopt;
  const auto kind = r.text(n, path, "kind", true);
  if (!kind) return std::nullopt;
  std::size_t nodes = 32;
  if (auto c = r.count(n, path, "nodes", false)) nodes = *c;
  std::optional<MassSpectrum> s;
  if (*kind == "discrete") {
    const auto list = n["species"];
    if (!list || !list.IsSequence() || list.size() == 0) {
      r.fail(join(path, "species"), "required: a non-empty list of {mass, weight}");
      return std::nullopt;
    }
    std::vector<Species> sp;
    bool ok = true;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string p = path + ".species[" + std::to_string(i) + "]";
      if (!r.map(list[i], p, {"mass", "weight"})) {
        ok = false;
        continue;
      }
      auto m = r.positive(list[i], p, "mass", true);
      auto w = r.number(list[i], p, "weight", true);
      if (w && !(*w >= 0.0 && *w <= 1.0)) {
        r.fail(join(p, "weight"), "must lie in [0, 1]");
        w.reset();
      }
      if (!m || !w) {
        ok = false;
        continue;
      }
      sp.push_back({*m, *w});
    }
    if (ok) r.guard(join(path, "species"), [&] { s = MassSpectrum::discrete(sp); });
  } else if (*kind == "gaussian") {
    auto mean = r.positive(n, path, "mean", true);
    auto sd = r.number(n, path, "sd", true);
    if (mean && sd) r.guard(path, [&] { s = MassSpectrum::gaussian(*mean, *sd, nodes); });
  } else if (*kind == "thermal") {
    auto m0 = r.positive(n, path, "m0", true);
    auto N = r.positive(n, path, "N", true);
    auto kT = r.positive(n, path, "kT", true);
    if (m0 && N && kT) r.guard(path, [&] { s = MassSpectrum::thermal(*m0, *N, *kT, nodes); });
  } else {
    r.fail(join(path, "kind"), "expected discrete, gaussian or thermal");
  }
  return s;
}

std::optional<GravityModel> read_gravity(Reader& r, const YAML::Node& n,
                                         const std::optional<MassSpectrum>& spectrum) {
  const std::string path = "gravity";
  if (!r.map(n, path, {"kind", "g", "forces"})) return std::nullopt;
  const auto kind = r.text(n, path, "kind", true);
  if (!kind) return std::nullopt;
  if (*kind == "eep") {
    auto g = r.numbers(n, path, "g", true);
    if (!g) return std::nullopt;
    if (g->size() != 3) {
      r.fail(join(path, "g"), "expected three components [gx, gy, gz]");
      return std::nullopt;
    }
    return GravityModel::eep({(*g)[0], (*g)[1], (*g)[2]});
  }
  if (*kind == "violating") {
    const auto list = n["forces"];
    if (!list || !list.IsSequence()) {
      r.fail(join(path, "forces"), "required: one [Gx, Gy, Gz] per spectrum species");
      return std::nullopt;
    }
    if (!spectrum) return std::nullopt;
    if (spectrum->continuous()) {
      r.fail(join(path, "forces"), "violating gravity needs a discrete spectrum");
      return std::nullopt;
    }
    if (list.size() != spectrum->nodes().size()) {
      r.fail(join(path, "forces"), "expected one entry per spectrum species");
      return std::nullopt;
    }
    std::vector<GravityModel::SpeciesForce> forces;
    for (std::size_t i = 0; i < list.size(); ++i) {
      std::vector<double> v;
      try {
        v = list[i].as<std::vector<double>>();
      } catch (const YAML::Exception&) {
      }
      if (v.size() != 3) {
        r.fail(path + ".forces[" + std::to_string(i) + "]", "expected [Gx, Gy, Gz]");
        return std::nullopt;
      }
      forces.push_back({spectrum->nodes()[i].mass, {v[0], v[1], v[2]}});
    }
    return GravityModel::violating(std::move(forces));
  }
  r.fail(join(path, "kind"), "expected eep or violating");
  return std::nullopt;
}

}  // namespace

Scenario parse_scenario(const std::string& yaml, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw ValidationError(std::string("scenario parse error: ") + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  for (const auto& o : overrides) apply_override(root, o);

  Reader r;
  Scenario s;
  if (!r.map(root, "", {"units", "experiment", "k0", "L", "initial_state", "spectrum", "screen",
                        "gravity", "grid", "method", "full_flux", "sweep", "lab", "outputs"})) {
    throw ValidationError(r.errors.front());
  }

  if (auto u = r.text(root, "", "units", true); u && *u != "natural") {
    r.fail("units", "must be 'natural' (hbar = c = 1)");
  }
  if (auto e = r.text(root, "", "experiment", true)) {
    if (*e == "pattern") s.experiment = Experiment::pattern;
    else if (*e == "visibility-curve") s.experiment = Experiment::visibility_curve;
    else if (*e == "revival") s.experiment = Experiment::revival;
    else if (*e == "tau-dec") s.experiment = Experiment::tau_dec;
    else if (*e == "frame-equivalence") s.experiment = Experiment::frame_equivalence;
    else r.fail("experiment", "expected pattern, visibility-curve, revival, tau-dec or frame-equivalence");
  }
  const auto k0 = r.positive(root, "", "k0", true);
  if (auto L = r.positive(root, "", "L", false)) s.L = *L;

  // Initial state and grid.
  bool initial_ok = false;
  if (const auto n = root["initial_state"]; !n) {
    r.fail("initial_state", "required");
  } else if (r.map(n, "initial_state",
                   {"kind", "z1", "z2", "epsilon", "center", "width_z", "width_x", "width_y"})) {
    const std::string p = "initial_state";
    auto& ini = s.initial;
    initial_ok = true;
    const auto kind = r.text(n, p, "kind", false).value_or("double-slit");
    if (kind == "double-slit") {
      ini.kind = ProfileKind::double_slit;
      auto z1 = r.number(n, p, "z1", true);
      auto z2 = r.number(n, p, "z2", true);
      auto eps = r.positive(n, p, "epsilon", true);
      if (z1 && z2 && eps) ini.slit = {*z1, *z2, *eps};
      else initial_ok = false;
    } else if (kind == "gaussian") {
      ini.kind = ProfileKind::gaussian;
      ini.gaussian.center = r.number(n, p, "center", false).value_or(0.0);
      auto w = r.positive(n, p, "width_z", true);
      if (w) ini.gaussian.width = *w;
      else initial_ok = false;
    } else {
      r.fail(join(p, "kind"), "expected double-slit or gaussian");
      initial_ok = false;
    }
    if (auto w = r.positive(n, p, "width_x", false)) ini.width_x = *w;
    if (auto w = r.positive(n, p, "width_y", false)) ini.width_y = *w;
  }
  if (k0) s.initial.k0 = *k0;
  if (const auto g = root["grid"]) {
    if (r.map(g, "grid", {"z", "pattern_points"})) {
      if (const auto z = g["z"]; z && r.map(z, "grid.z", {"points", "extent", "center"})) {
        if (auto p = r.count(z, "grid.z", "points", false)) {
          if ((*p & (*p - 1)) != 0) r.fail("grid.z.points", "must be a power of two");
          s.initial.z_grid.points = *p;
        }
        if (auto e = r.positive(z, "grid.z", "extent", false)) s.initial.z_grid.extent = *e;
        if (auto c = r.number(z, "grid.z", "center", false)) s.initial.z_grid.center = *c;
      }
      if (auto p = r.count(g, "grid", "pattern_points", false)) {
        if (*p < 16) r.fail("grid.pattern_points", "must be at least 16");
        s.pattern_points = *p;
      }
    }
  }
  if (initial_ok && k0) {
    initial_ok = r.guard("initial_state", [&] { s.initial.validate(); });
  }
  if (initial_ok) {
    const double nyq = std::numbers::pi * static_cast<double>(s.initial.z_grid.points) / s.initial.z_grid.extent;
    if (s.initial.z_bandwidth() > nyq) {
      std::ostringstream msg;
      msg << "aliasing: profile bandwidth " << s.initial.z_bandwidth()
          << " exceeds the grid Nyquist wavenumber " << nyq << " (refine grid.z)";
      r.fail("grid.z", msg.str());
    }
  }

  // Spectrum.
  std::optional<MassSpectrum> spectrum;
  if (const auto n = root["spectrum"]; !n) r.fail("spectrum", "required");
  else spectrum = read_spectrum(r, n);
  if (spectrum) {
    s.spectrum = *spectrum;
    if (k0) {
      for (const auto& sp : spectrum->nodes()) {
        if (!r.guard("spectrum", [&] { require_nonrelativistic(*k0, sp.mass); })) break;
      }
    }
  }

  if (const auto n = root["screen"]) s.screen = read_screen(r, n);
  if (const auto n = root["gravity"]) s.gravity = read_gravity(r, n, spectrum);

  if (auto m = r.text(root, "", "method", false)) {
    if (*m == "shifted") s.method = PatternMethod::shifted_pattern;
    else if (*m == "full") s.method = PatternMethod::full_flux;
    else r.fail("method", "expected shifted or full");
  }
  if (const auto n = root["full_flux"]) {
    if (r.map(n, "full_flux", {"min_steps", "max_steps", "tolerance", "window_widths"})) {
      if (auto v = r.count(n, "full_flux", "min_steps", false)) s.full.min_steps = *v;
      if (auto v = r.count(n, "full_flux", "max_steps", false)) s.full.max_steps = *v;
      if (auto v = r.positive(n, "full_flux", "tolerance", false)) s.full.tolerance = *v;
      if (auto v = r.positive(n, "full_flux", "window_widths", false)) s.full.window_widths = *v;
      if (s.full.min_steps < 2 || s.full.max_steps < 2 * s.full.min_steps) {
        r.fail("full_flux", "need min_steps >= 2 and max_steps >= 2 * min_steps");
      }
    }
  }
  if (const auto n = root["sweep"]) {
    if (r.map(n, "sweep", {"t_start", "t_stop", "points"})) {
      auto a = r.positive(n, "sweep", "t_start", true);
      auto b = r.positive(n, "sweep", "t_stop", true);
      auto c = r.count(n, "sweep", "points", true);
      if (a && b && c) {
        if (*b < *a) r.fail("sweep.t_stop", "must not be smaller than t_start");
        else s.sweep = SweepSpec{*a, *b, *c};
      }
    }
  }
  if (const auto n = root["lab"]) {
    if (r.map(n, "lab", {"screen_z_velocity"})) {
      if (const auto u = n["screen_z_velocity"]) {
        if (u.IsScalar() && u.as<std::string>() == "matched") {
          s.screen_z_velocity = std::numeric_limits<double>::quiet_NaN();
        } else if (auto v = r.number(n, "lab", "screen_z_velocity", false)) {
          if (!(std::abs(*v) < 1.0)) r.fail("lab.screen_z_velocity", "must satisfy |u| < 1");
          s.screen_z_velocity = *v;
        }
      }
    }
  }
  if (const auto n = root["outputs"]) {
    if (r.map(n, "outputs", {"pattern_csv", "pattern_json", "report_json", "curve_csv"})) {
      auto set = [&](const char* key, std::string& dst) {
        if (auto v = r.text(n, "outputs", key, false)) {
          if (v->empty() || fs::path(*v).has_parent_path()) r.fail(join("outputs", key), "must be a plain file name");
          else dst = *v;
        }
      };
      set("pattern_csv", s.outputs.pattern_csv);
      set("pattern_json", s.outputs.pattern_json);
      set("report_json", s.outputs.report_json);
      set("curve_csv", s.outputs.curve_csv);
    }
  }

  // Experiment-level requirements.
  const bool is_ds = s.initial.kind == ProfileKind::double_slit;
  switch (s.experiment) {
    case Experiment::pattern:
      if (!s.L) r.fail("L", "required for the pattern experiment");
      if (!s.screen && !s.gravity) r.fail("screen", "pattern needs a screen or a gravity section");
      if (s.screen && s.gravity) r.fail("gravity", "give either screen (Lorentz frame) or gravity (lab frame), not both");
      break;
    case Experiment::visibility_curve:
      if (!s.sweep) r.fail("sweep", "required for visibility-curve");
      if (!s.screen) r.fail("screen", "required for visibility-curve");
      break;
    case Experiment::tau_dec:
      if (spectrum && spectrum->kind() != SpectrumKind::thermal) r.fail("spectrum.kind", "tau-dec needs a thermal spectrum");
      if (!s.screen || s.screen->kind() != WorldlineKind::uniform_acceleration) {
        r.fail("screen", "tau-dec needs a uniform-acceleration screen");
      }
      if (!is_ds) r.fail("initial_state.kind", "tau-dec needs a double-slit initial state");
      break;
    case Experiment::revival:
      if (spectrum && spectrum->continuous()) r.fail("spectrum.kind", "revival needs a discrete spectrum");
      if (!s.screen || s.screen->kind() != WorldlineKind::uniform_acceleration) {
        r.fail("screen", "revival needs a uniform-acceleration screen");
      }
      if (!is_ds) r.fail("initial_state.kind", "revival needs a double-slit initial state");
      break;
    case Experiment::frame_equivalence:
      if (!s.gravity) r.fail("gravity", "required for frame-equivalence");
      else if (s.gravity->kind() != GravityKind::eep) r.fail("gravity.kind", "frame-equivalence accepts only eep gravity");
      if (!s.L && !s.sweep) r.fail("L", "frame-equivalence needs L or a sweep");
      break;
  }

  // Preconditions that depend on the screen distance.
  if (initial_ok && spectrum && k0) {
    std::vector<double> Ls;
    if (s.L > 0.0) Ls.push_back(s.L);
    if (s.sweep) Ls.push_back(*k0 * s.sweep->t_start / spectrum->mean());
    for (double L : Ls) {
      const double l = s.initial.packet_size();
      if (l / L > 0.1) {
        std::ostringstream msg;
        msg << "paraxial assumption violated: packet size " << l << " exceeds 10% of L = " << L;
        r.fail(s.sweep && L != s.L ? "sweep.t_start" : "L", msg.str());
      }
    }
    if (s.screen && s.method == PatternMethod::shifted_pattern &&
        (s.experiment == Experiment::pattern || s.experiment == Experiment::visibility_curve)) {
      std::vector<double> ts;
      if (s.experiment == Experiment::pattern && s.L > 0.0) ts.push_back(arrival_time(spectrum->mean(), *k0, s.L));
      if (s.experiment == Experiment::visibility_curve && s.sweep) ts.push_back(s.sweep->t_stop);
      for (double t : ts) {
        r.guard("screen", [&] {
          const double b = s.screen->velocity(t);
          if (!(b * b < 1e-3)) {
            std::ostringstream msg;
            msg << "use full-flux method: screen beta^2 = " << b * b << " at t = " << t;
            throw ValidationError(msg.str());
          }
        });
      }
    }
  }

  if (!r.errors.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& e : r.errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  YAML::Emitter out;
  out << root;
  s.source = out.c_str();
  return s;
}

Scenario load_scenario(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), overrides);
}

namespace {

using nlohmann::json;

struct Runner {
  const Scenario& s;
  fs::path dir;
  RunResult result;

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir / name;
    std::ofstream out(p);
    if (!out) throw ValidationError("cannot write output file: " + p.string());
    out << content;
    result.files.push_back(p);
  }

  double L_at(double t) const { return s.initial.k0 * t / s.spectrum.mean(); }

  double alpha_for(const Pattern& p, double L) const {
    if (s.initial.kind == ProfileKind::double_slit) {
      return FringeModel::double_slit(s.initial.k0, s.initial.slit.z1, s.initial.slit.z2, L).alpha;
    }
    return estimate_fringe_wavenumber(p);
  }

  SimulationOptions sim_options() const {
    SimulationOptions o;
    o.method = s.method;
    o.grid_points = s.pattern_points;
    o.full = s.full;
    return o;
  }

  Pattern screen_pattern(double L) const {
    return simulate_pattern(s.initial, s.spectrum, s.screen->with_L(L), sim_options());
  }

  double simulated_visibility(double t) const {
    const double L = L_at(t);
    const Pattern p = screen_pattern(L);
    return fit_visibility(p, alpha_for(p, L)).visibility;
  }

  json echo() const {
    return {{"experiment", to_string(s.experiment)}, {"spectrum", s.spectrum.describe()},
            {"k0", s.initial.k0}, {"scenario", s.source}};
  }

  void pattern() {
    Pattern p;
    json report = echo();
    if (s.screen) {
      const auto w = s.screen->with_L(s.L);
      p = simulate_pattern(s.initial, s.spectrum, w, sim_options());
      if (s.initial.kind == ProfileKind::double_slit) {
        const auto fr = FringeModel::double_slit(s.initial.k0, s.initial.slit.z1, s.initial.slit.z2, s.L);
        report["V_phasor"] = phasor_visibility(s.spectrum, dephasing_phase(s.spectrum, fr, w, s.initial.k0, s.L)).visibility;
      }
    } else {
      LabPatternOptions o;
      o.grid_points = s.pattern_points;
      o.full = s.full;
      if (s.screen_z_velocity) {
        double u = *s.screen_z_velocity;
        if (std::isnan(u)) {
          // Mean fall velocity of the packets as they land.
          const double t_bar = arrival_time(s.spectrum.mean(), s.initial.k0, s.L);
          u = 0.0;
          for (const auto& sp : s.spectrum.nodes()) u += sp.weight * s.gravity->force(sp.mass)[2] / sp.mass * t_bar;
        }
        o.screen_z_velocity = u;
        report["screen_z_velocity"] = u;
      }
      p = lab_pattern(s.initial, s.spectrum, *s.gravity, s.L, o);
    }
    const double alpha = alpha_for(p, s.L);
    const auto fit = fit_visibility(p, alpha);
    report["method"] = to_string(p.method);
    report["worldline"] = p.worldline;
    report["L"] = s.L;
    report["t_mbar"] = arrival_time(s.spectrum.mean(), s.initial.k0, s.L);
    report["alpha"] = alpha;
    report["V_fit"] = fit.visibility;
    report["phi_fit"] = fit.phase;
    write(s.outputs.pattern_csv, pattern_csv(p));
    write(s.outputs.pattern_json, pattern_json(p));
    write(s.outputs.report_json, report.dump(2));
    std::ostringstream sum;
    sum << "pattern: V_fit = " << fit.visibility << " (" << to_string(p.method) << ")";
    result.summary = sum.str();
  }

  void visibility_curve() {
    std::vector<CurveRow> rows;
    for (double t : s.sweep->times()) {
      const double L = L_at(t);
      const auto w = s.screen->with_L(L);
      const Pattern p = screen_pattern(L);
      const double alpha = alpha_for(p, L);
      const auto fit = fit_visibility(p, alpha);
      CurveRow row;
      row.t = t;
      row.v_fit = fit.visibility;
      row.phi = fit.phase;
      FringeModel fr;
      fr.alpha = alpha;
      try {
        row.v_short = short_time_visibility(s.spectrum, fr, w, t).visibility;
      } catch (const ValidationError&) {
      }
      row.v_phasor = phasor_visibility(s.spectrum, dephasing_phase(s.spectrum, fr, w, s.initial.k0, L)).visibility;
      rows.push_back(row);
    }
    write(s.outputs.curve_csv, visibility_curve_csv(rows));
    json report = echo();
    report["rows"] = json::array();
    for (const auto& r : rows) {
      auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
      report["rows"].push_back({{"t", r.t}, {"V_fit", num(r.v_fit)}, {"V_shorttime", num(r.v_short)},
                                {"V_phasor", num(r.v_phasor)}, {"phi", num(r.phi)}});
    }
    write(s.outputs.report_json, report.dump(2));
    result.summary = "visibility-curve: " + std::to_string(rows.size()) + " points";
  }

  void tau_dec() {
    const double g = s.screen->g();
    const double dz = s.initial.slit.z1 - s.initial.slit.z2;
    const double tau = thermal_decoherence_time(s.spectrum.n_oscillators(), s.spectrum.kT(), g, dz);
    const SweepSpec sweep = s.sweep.value_or(SweepSpec{0.25 * tau, 2.0 * tau, 8});
    const double target = std::exp(-1.0);
    std::vector<double> ts = sweep.times();
    std::vector<double> vs;
    json samples = json::array();
    for (double t : ts) {
      vs.push_back(simulated_visibility(t));
      samples.push_back({{"t", t}, {"V_fit", vs.back()}});
    }
    std::optional<double> crossing;
    for (std::size_t i = 0; i + 1 < ts.size() && !crossing; ++i) {
      if (vs[i] >= target && vs[i + 1] < target) {
        double lo = ts[i], hi = ts[i + 1];
        while (hi - lo > 1e-6 * tau) {
          const double mid = 0.5 * (lo + hi);
          (simulated_visibility(mid) >= target ? lo : hi) = mid;
        }
        crossing = 0.5 * (lo + hi);
      }
    }
    if (!crossing) throw NumericalError("simulated visibility does not cross exp(-1) inside the sweep");
    json report = echo();
    report["tau_dec"] = tau;
    report["t_cross"] = *crossing;
    report["relative_difference"] = (*crossing - tau) / tau;
    report["samples"] = samples;
    write(s.outputs.report_json, report.dump(2));
    std::ostringstream sum;
    sum << "tau-dec: analytic " << tau << ", simulated crossing " << *crossing;
    result.summary = sum.str();
  }

  void revival() {
    const double L_ref = s.L > 0.0 ? s.L : 1.0;
    const auto fr = FringeModel::double_slit(s.initial.k0, s.initial.slit.z1, s.initial.slit.z2, L_ref);
    const Revival rv = find_revival(s.spectrum, fr, s.screen->with_L(L_ref), s.initial.k0, L_ref);
    json report = echo();
    report["always_visible"] = rv.always_visible;
    if (rv.always_visible) {
      report["t_rev"] = nullptr;
      result.summary = "revival: always visible";
    } else {
      report["t_rev"] = rv.time;
      report["V_at_t_rev"] = simulated_visibility(rv.time);
      report["V_at_half_t_rev"] = simulated_visibility(0.5 * rv.time);
      std::ostringstream sum;
      sum << "revival: t_rev = " << rv.time << ", V(t_rev) = " << report["V_at_t_rev"].get<double>();
      result.summary = sum.str();
    }
    write(s.outputs.report_json, report.dump(2));
  }

  void frame_equivalence() {
    std::vector<double> Ls;
    if (s.sweep) {
      for (double t : s.sweep->times()) Ls.push_back(L_at(t));
    } else {
      Ls.push_back(s.L);
    }
    LabPatternOptions o;
    o.grid_points = s.pattern_points;
    o.full = s.full;
    json runs = json::array();
    double rms = 0.0, dv = 0.0;
    bool pass = true;
    for (double L : Ls) {
      const auto r = frame_equivalence_check(s.initial, s.spectrum, *s.gravity, L, o);
      runs.push_back(json::parse(frame_equivalence_json(r)));
      rms = std::max(rms, r.rms_pattern_diff);
      dv = std::max(dv, r.delta_visibility);
      pass = pass && r.pass;
    }
    json report = echo();
    report["rms_pattern_diff"] = rms;
    report["delta_visibility"] = dv;
    report["pass"] = pass;
    report["g"] = s.gravity->g()[2];
    report["runs"] = runs;
    write(s.outputs.report_json, report.dump(2));
    std::ostringstream sum;
    sum << "frame-equivalence: " << (pass ? "pass" : "FAIL") << " (rms " << rms << ", dV " << dv << ")";
    result.summary = sum.str();
  }
};

}  // namespace

RunResult run(const Scenario& s, const fs::path& output_dir) {
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) throw ValidationError("cannot create output directory: " + output_dir.string());
  Runner r{s, output_dir, {}};
  switch (s.experiment) {
    case Experiment::pattern:
      r.pattern();
      break;
    case Experiment::visibility_curve:
      r.visibility_curve();
      break;
    case Experiment::tau_dec:
      r.tau_dec();
      break;
    case Experiment::revival:
      r.revival();
      break;
    case Experiment::frame_equivalence:
      r.frame_equivalence();
      break;
  }
  return r.result;
}

}  // namespace mwi
