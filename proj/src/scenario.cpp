#include "uscqed/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#ifndef USCQED_VERSION
#define USCQED_VERSION "0.0.0"
#endif

namespace uscqed {

namespace {

using json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

std::string join_path(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

std::optional<double> parse_plain_number(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// "0.5", "pi", "-pi", "2*pi", "pi/6", "2*pi/3".
std::optional<double> parse_angle(std::string_view s) {
  const auto at = s.find("pi");
  if (at == std::string_view::npos) return parse_plain_number(s);
  std::string_view head = s.substr(0, at);
  std::string_view tail = s.substr(at + 2);
  while (!head.empty() && head.front() == ' ') head.remove_prefix(1);
  double factor = 1.0;
  if (head == "-") {
    factor = -1.0;
  } else if (!head.empty()) {
    if (head.back() != '*') return std::nullopt;
    const auto f = parse_plain_number(head.substr(0, head.size() - 1));
    if (!f) return std::nullopt;
    factor = *f;
  }
  while (!tail.empty() && tail.back() == ' ') tail.remove_suffix(1);
  double divisor = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/') return std::nullopt;
    const auto d = parse_plain_number(tail.substr(1));
    if (!d || *d == 0.0) return std::nullopt;
    divisor = *d;
  }
  return factor * kPi / divisor;
}

bool snake_case(std::string_view s) {
  if (s.empty() || !(s.front() >= 'a' && s.front() <= 'z')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; });
}

// Collects every problem instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> errors;

  void error(const std::string& path, const std::string& message) { errors.push_back(path + ": " + message); }

  bool object(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) {
      error(path.empty() ? "config" : path, "expected an object");
      return false;
    }
    for (const auto& item : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
        error(join_path(path, item.key()), "unknown key");
      }
    }
    return true;
  }

  const json* find(const json& obj, std::string_view key) {
    const auto it = obj.find(std::string(key));
    return it == obj.end() ? nullptr : &*it;
  }

  std::optional<double> number(const json& obj, const std::string& path, std::string_view key) {
    const json* v = find(obj, key);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      error(join_path(path, key), "expected a number");
      return std::nullopt;
    }
    const double x = v->get<double>();
    if (!std::isfinite(x)) {
      error(join_path(path, key), "must be finite");
      return std::nullopt;
    }
    return x;
  }

  std::optional<double> angle_value(const json& v, const std::string& path) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      if (auto a = parse_angle(v.get<std::string>())) return a;
    }
    error(path, "expected a number or an angle such as \"pi/6\"");
    return std::nullopt;
  }

  std::optional<double> angle(const json& obj, const std::string& path, std::string_view key) {
    const json* v = find(obj, key);
    if (!v) return std::nullopt;
    return angle_value(*v, join_path(path, key));
  }

  std::optional<long long> integer(const json& obj, const std::string& path, std::string_view key) {
    const json* v = find(obj, key);
    if (!v) return std::nullopt;
    if (v->is_number_integer()) return v->get<long long>();
    if (v->is_number_float()) {
      const double x = v->get<double>();
      if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 1e15) return static_cast<long long>(x);
    }
    error(join_path(path, key), "expected an integer");
    return std::nullopt;
  }

  std::optional<std::string> string(const json& obj, const std::string& path, std::string_view key) {
    const json* v = find(obj, key);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      error(join_path(path, key), "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<bool> boolean(const json& obj, const std::string& path, std::string_view key) {
    const json* v = find(obj, key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      error(join_path(path, key), "expected true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  std::optional<std::vector<double>> numbers(const json& obj, const std::string& path, std::string_view key,
                                             bool angles = false) {
    const json* v = find(obj, key);
    if (!v) return std::nullopt;
    const std::string here = join_path(path, key);
    if (!v->is_array()) {
      error(here, "expected an array");
      return std::nullopt;
    }
    std::vector<double> out;
    bool ok = true;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      if (angles) {
        if (auto a = angle_value(e, index_path(here, i))) {
          out.push_back(*a);
        } else {
          ok = false;
        }
      } else if (e.is_number() && std::isfinite(e.get<double>())) {
        out.push_back(e.get<double>());
      } else {
        error(index_path(here, i), "expected a finite number");
        ok = false;
      }
    }
    if (!ok) return std::nullopt;
    return out;
  }

  template <class Parse>
  auto enumeration(const json& obj, const std::string& path, std::string_view key, Parse parse)
      -> std::optional<decltype(parse(std::string_view{}))> {
    const auto s = string(obj, path, key);
    if (!s) return std::nullopt;
    try {
      return parse(*s);
    } catch (const ConfigError& e) {
      error(join_path(path, key), e.what());
      return std::nullopt;
    }
  }
};

void parse_system(Reader& r, const json& j, SystemParams& p) {
  const std::string path = "system";
  if (!r.object(j, path, {"n_cavities", "omega_c", "delta", "omega_q", "J", "g_abs", "phases", "theta", "n_max"})) {
    return;
  }
  if (auto n = r.integer(j, path, "n_cavities")) {
    if (*n == 3) {
      p = SystemParams::three_cavity();
    } else {
      p.n_cavities = static_cast<int>(*n);
    }
  }
  if (auto v = r.numbers(j, path, "omega_c")) p.omega_c = *v;
  if (auto v = r.number(j, path, "delta")) p.delta = *v;
  if (const json* q = r.find(j, "omega_q")) {
    if (q->is_number()) {
      const double w = q->get<double>();
      p.omega_q = {w, w};
    } else if (auto v = r.numbers(j, path, "omega_q")) {
      p.omega_q = *v;
    }
  }
  if (auto v = r.number(j, path, "J")) p.J = *v;
  if (auto v = r.number(j, path, "g_abs")) p.g_abs = *v;
  if (auto v = r.numbers(j, path, "phases", true)) p.phases = *v;
  if (auto v = r.angle(j, path, "theta")) p.theta = *v;
  if (const json* n = r.find(j, "n_max")) {
    if (n->is_string() && n->get<std::string>() == "auto") {
      p.auto_n_max = true;
    } else if (auto v = r.integer(j, path, "n_max")) {
      p.n_max = static_cast<int>(*v);
    }
  }
}

void parse_sweep(Reader& r, const json& j, ScenarioMode mode, SweepSpec& s) {
  const std::string path = "sweep";
  if (!r.object(j, path, {"min", "max", "points", "n_levels", "alternate_phases"})) return;
  const auto lo = r.number(j, path, "min");
  const auto hi = r.number(j, path, "max");
  const auto points = r.integer(j, path, "points");
  if (!lo) r.error("sweep.min", "required");
  if (!hi) r.error("sweep.max", "required");
  if (!points) r.error("sweep.points", "required");
  if (lo) s.min = *lo;
  if (hi) s.max = *hi;
  if (points) {
    s.points = static_cast<Index>(*points);
    if (s.points < 2) r.error("sweep.points", "grid needs at least 2 points");
  }
  if (lo && hi && !(*hi > *lo)) r.error("sweep.max", "must exceed sweep.min");
  if (auto n = r.integer(j, path, "n_levels")) {
    s.n_levels = static_cast<int>(*n);
    if (s.n_levels < 2) r.error("sweep.n_levels", "must be >= 2");
  }
  if (auto alt = r.numbers(j, path, "alternate_phases", true)) {
    if (mode != ScenarioMode::spectrum_sweep) {
      r.error("sweep.alternate_phases", "only used by spectrum_sweep");
    } else {
      SystemParams probe;
      probe.phases = *alt;
      for (const auto& e : probe.validation_errors()) {
        if (e.rfind("system.phases", 0) == 0) r.error("sweep.alternate_phases", e.substr(e.find(':') + 2));
      }
      s.alternate_phases = *alt;
    }
  }
}

void parse_gap(Reader& r, const json& j, GapSpec& g) {
  const std::string path = "gap";
  if (!r.object(j, path, {"levels", "min", "max", "tolerance", "coarse_points"})) return;
  const json* levels = r.find(j, "levels");
  if (!levels) {
    r.error("gap.levels", "required");
  } else if (!levels->is_array() || levels->size() != 2 || !(*levels)[0].is_number_integer() ||
             !(*levels)[1].is_number_integer()) {
    r.error("gap.levels", "expected two level indices");
  } else {
    g.levels = {(*levels)[0].get<int>(), (*levels)[1].get<int>()};
    if (g.levels.lower < 0 || g.levels.upper <= g.levels.lower) {
      r.error("gap.levels", "need 0 <= lower < upper");
    }
  }
  const auto lo = r.number(j, path, "min");
  const auto hi = r.number(j, path, "max");
  if (!lo) r.error("gap.min", "required");
  if (!hi) r.error("gap.max", "required");
  if (lo) g.min = *lo;
  if (hi) g.max = *hi;
  if (lo && hi && !(*hi > *lo)) r.error("gap.max", "must exceed gap.min");
  if (lo && *lo <= 0.0) r.error("gap.min", "qubit frequency must be positive");
  if (auto t = r.number(j, path, "tolerance")) {
    g.tolerance = *t;
    if (!(g.tolerance > 0.0)) r.error("gap.tolerance", "must be > 0");
  }
  if (auto c = r.integer(j, path, "coarse_points")) {
    g.coarse_points = static_cast<int>(*c);
    if (g.coarse_points < 5) r.error("gap.coarse_points", "must be >= 5");
  }
}

void parse_init(Reader& r, const json& j, InitSpec& init) {
  if (!r.object(j, "init", {"label", "dressed"})) return;
  if (auto s = r.string(j, "init", "label")) init.label = *s;
  if (auto b = r.boolean(j, "init", "dressed")) init.dressed = *b;
}

void parse_pulse(Reader& r, const json& j, PulseConfig& pc) {
  const std::string path = "pulse";
  if (!r.object(j, path, {"amplitude", "omega_d", "t0", "tau", "norm", "area_scale", "calibration"})) return;
  PulseSpec& pulse = pc.pulse;
  if (auto a = r.number(j, path, "amplitude")) {
    pulse.amplitude = *a;
  } else {
    r.error("pulse.amplitude", "required");
  }
  if (const json* w = r.find(j, "omega_d")) {
    if (w->is_number()) {
      pulse.omega_d = w->get<double>();
    } else if (w->is_string()) {
      try {
        pulse.omega_d = CarrierMidpoint::parse(w->get<std::string>());
      } catch (const ConfigError& e) {
        r.error("pulse.omega_d", e.what());
      }
    } else {
      r.error("pulse.omega_d", "expected a frequency or a directive such as \"mid:3,4\"");
    }
  } else {
    r.error("pulse.omega_d", "required");
  }
  if (auto t = r.number(j, path, "tau")) {
    pulse.tau = *t;
  } else {
    r.error("pulse.tau", "required");
  }
  if (auto t = r.number(j, path, "t0")) {
    pulse.t0 = *t;
  } else {
    r.error("pulse.t0", "required");
  }
  if (auto n = r.string(j, path, "norm")) {
    if (*n == "literal") {
      pulse.norm = EnvelopeNorm::literal;
    } else if (*n == "sqrt_two_pi") {
      pulse.norm = EnvelopeNorm::sqrt_two_pi;
    } else {
      r.error("pulse.norm", "expected \"literal\" or \"sqrt_two_pi\"");
    }
  }
  if (auto s = r.number(j, path, "area_scale")) pulse.area_scale = *s;
  if (const json* c = r.find(j, "calibration")) {
    CalibrationSpec cal;
    if (r.object(*c, "pulse.calibration", {"to", "dressed"})) {
      if (auto to = r.string(*c, "pulse.calibration", "to")) {
        cal.to = *to;
      } else {
        r.error("pulse.calibration.to", "required");
      }
      if (auto d = r.boolean(*c, "pulse.calibration", "dressed")) cal.dressed = *d;
    }
    if (r.find(j, "area_scale")) r.error("pulse.area_scale", "conflicts with pulse.calibration, which sets it");
    pc.calibration = cal;
  }
  try {
    pulse.validate();
  } catch (const ConfigError& e) {
    r.error("pulse", e.what());
  }
}

void parse_time(Reader& r, const json& j, ScenarioMode mode, TimeSpec& t) {
  const std::string path = "time";
  if (!r.object(j, path, {"t_max", "dt", "output_stride"})) return;
  if (auto v = r.number(j, path, "t_max")) {
    t.t_max = *v;
    if (!(t.t_max > 0.0)) r.error("time.t_max", "must be > 0");
  } else {
    r.error("time.t_max", "required");
  }
  if (auto v = r.number(j, path, "dt")) {
    t.dt = *v;
    if (t.dt < 0.0) r.error("time.dt", "must be >= 0");
  }
  if (mode == ScenarioMode::free_evolution && !(t.dt > 0.0)) r.error("time.dt", "free evolution needs a sampling step > 0");
  if (auto v = r.integer(j, path, "output_stride")) {
    t.output_stride = static_cast<Index>(*v);
    if (t.output_stride < 1) r.error("time.output_stride", "must be >= 1");
  }
}

void parse_observables(Reader& r, const json& j, std::vector<ObservableSpec>& out) {
  const std::string path = "observables";
  if (!j.is_array()) {
    r.error(path, "expected an array");
    return;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string here = index_path(path, i);
    const json& o = j[i];
    if (!r.object(o, here, {"kind", "label", "mode", "name", "dressed"})) continue;
    ObservableSpec spec;
    if (auto k = r.enumeration(o, here, "kind", parse_observable_kind)) {
      spec.kind = *k;
    } else if (!r.find(o, "kind")) {
      r.error(join_path(here, "kind"), "required");
      continue;
    } else {
      continue;
    }
    const auto label = r.string(o, here, "label");
    const auto mode = r.string(o, here, "mode");
    switch (spec.kind) {
      case ObservableKind::state_projector:
        if (!label) r.error(join_path(here, "label"), "required for state_projector");
        if (mode) r.error(join_path(here, "mode"), "not used by state_projector");
        spec.payload = label.value_or("");
        break;
      case ObservableKind::photon_number:
        if (!mode) r.error(join_path(here, "mode"), "required for photon_number");
        if (label) r.error(join_path(here, "label"), "not used by photon_number");
        spec.payload = mode.value_or("");
        break;
      case ObservableKind::qubit_joint_excited:
        if (label) r.error(join_path(here, "label"), "not used by qubit_joint_excited");
        if (mode) r.error(join_path(here, "mode"), "not used by qubit_joint_excited");
        break;
    }
    if (auto d = r.boolean(o, here, "dressed")) spec.dressed = *d;
    if (spec.dressed && spec.kind == ObservableKind::photon_number) {
      r.error(join_path(here, "dressed"), "photon numbers have no dressed form");
    }
    if (auto n = r.string(o, here, "name")) spec.name = *n;
    const std::string name = spec.column_name();
    if (!snake_case(name) || name == "time") {
      r.error(join_path(here, "name"), "column name \"" + name + "\" must be snake_case and not \"time\"");
    }
    for (const auto& prev : out) {
      if (prev.column_name() == name) r.error(join_path(here, "name"), "duplicate column name \"" + name + "\"");
    }
    out.push_back(spec);
  }
}

void parse_output(Reader& r, const json& j, OutputSpec& out) {
  if (!r.object(j, "output", {"path", "format"})) return;
  if (auto p = r.string(j, "output", "path")) {
    out.path = *p;
    if (out.path.empty()) r.error("output.path", "must not be empty");
  }
  if (auto f = r.enumeration(j, "output", "format", parse_output_format)) out.format = *f;
}

bool uses_section(ScenarioMode mode, std::string_view section) {
  using M = ScenarioMode;
  const bool dynamics = mode == M::free_evolution || mode == M::driven_evolution;
  if (section == "sweep") return mode == M::spectrum_sweep || mode == M::supermode_profile;
  if (section == "gap") return mode == M::gap_search;
  if (section == "init" || section == "time" || section == "observables") return dynamics;
  if (section == "pulse") return mode == M::driven_evolution;
  return true;
}

// Checks that need a valid system: labels, modes and pulse timing.
void check_semantics(Reader& r, const ScenarioConfig& c) {
  const auto& p = c.system;
  auto check_label = [&](const std::string& path, const std::string& label) {
    try {
      (void)resolve_state_label(p, c.basis, label);
    } catch (const std::exception& e) {
      r.error(path, e.what());
    }
  };
  if (c.mode == ScenarioMode::supermode_profile && p.n_cavities != 3) {
    r.error("system.n_cavities", "supermode_profile sweeps the central detuning and needs 3 cavities");
  }
  if (c.mode == ScenarioMode::supermode_profile && c.sweep) {
    const double lowest = std::min(c.sweep->min, c.sweep->max);
    if (p.omega_c.size() == 3 && p.omega_c[1] + lowest <= 0.0) {
      r.error("sweep.min", "central cavity frequency must stay positive");
    }
  }
  if (c.mode == ScenarioMode::spectrum_sweep && c.sweep && c.sweep->min <= 0.0) {
    r.error("sweep.min", "qubit frequency must be positive");
  }
  if (c.mode != ScenarioMode::free_evolution && c.mode != ScenarioMode::driven_evolution) return;
  check_label("init.label", c.init.label);
  if (c.pulse && c.pulse->calibration) check_label("pulse.calibration.to", c.pulse->calibration->to);
  for (std::size_t i = 0; i < c.observables.size(); ++i) {
    const auto& o = c.observables[i];
    const std::string here = index_path("observables", i);
    if (o.kind == ObservableKind::state_projector) {
      check_label(join_path(here, "label"), o.payload);
    } else if (o.kind == ObservableKind::photon_number) {
      const auto bare = bare_space(p);
      const auto super = supermode_space(p);
      bool found = false;
      for (const auto& s : {bare, super}) {
        for (const auto& m : s->modes()) found = found || (m.label == o.payload && m.kind == ModeKind::cavity);
      }
      if (!found) r.error(join_path(here, "mode"), "no cavity or normal mode named \"" + o.payload + "\"");
    }
  }
  if (c.mode == ScenarioMode::driven_evolution && c.pulse && c.time) {
    const auto& pulse = c.pulse->pulse;
    if (pulse.t0 < 6.0 * pulse.tau) r.error("pulse.t0", "must be >= 6 tau so the pulse starts after t = 0");
    if (c.time->t_max < pulse.t0 + 6.0 * pulse.tau) r.error("time.t_max", "must reach t0 + 6 tau");
    if (!pulse.carrier_resolved()) {
      const int highest = std::get<CarrierMidpoint>(pulse.omega_d).highest_level();
      const Index dim = space_for(p, c.basis)->total_dim();
      if (highest >= dim) r.error("pulse.omega_d", "refers to level " + std::to_string(highest) + " beyond the space");
    }
  }
}

ScenarioConfig parse_config(const json& root) {
  Reader r;
  ScenarioConfig c;
  if (!r.object(root, "", {"scenario_id", "description", "mode", "system", "basis", "sweep", "gap", "init", "pulse",
                           "time", "observables", "output"})) {
    throw ValidationError(r.errors);
  }
  if (auto id = r.string(root, "", "scenario_id")) {
    c.scenario_id = *id;
    if (!snake_case(c.scenario_id)) r.error("scenario_id", "must be snake_case (used as a file name)");
  } else if (!r.find(root, "scenario_id")) {
    r.error("scenario_id", "required");
  }
  if (auto d = r.string(root, "", "description")) c.description = *d;
  bool have_mode = false;
  if (auto m = r.enumeration(root, "", "mode", parse_scenario_mode)) {
    c.mode = *m;
    have_mode = true;
  } else if (!r.find(root, "mode")) {
    r.error("mode", "required");
  }
  if (const json* s = r.find(root, "system")) parse_system(r, *s, c.system);
  for (const auto& e : c.system.validation_errors()) r.errors.push_back(e);
  if (auto b = r.enumeration(root, "", "basis", parse_basis)) c.basis = *b;

  if (have_mode) {
    for (std::string_view section : {"sweep", "gap", "init", "pulse", "time", "observables"}) {
      if (r.find(root, section) && !uses_section(c.mode, section)) {
        r.error(std::string(section), "not used by mode " + to_string(c.mode));
      }
    }
    auto required = [&](std::string_view section) -> const json* {
      const json* s = r.find(root, section);
      if (!s && uses_section(c.mode, section)) r.error(std::string(section), "required by mode " + to_string(c.mode));
      return s && uses_section(c.mode, section) ? s : nullptr;
    };
    if (c.mode == ScenarioMode::spectrum_sweep || c.mode == ScenarioMode::supermode_profile) {
      if (const json* s = required("sweep")) parse_sweep(r, *s, c.mode, c.sweep.emplace());
    }
    if (c.mode == ScenarioMode::gap_search) {
      if (const json* s = required("gap")) parse_gap(r, *s, c.gap.emplace());
    }
    if (c.mode == ScenarioMode::free_evolution || c.mode == ScenarioMode::driven_evolution) {
      if (const json* s = r.find(root, "init")) parse_init(r, *s, c.init);
      if (const json* s = required("time")) parse_time(r, *s, c.mode, c.time.emplace());
      if (const json* s = r.find(root, "observables")) {
        parse_observables(r, *s, c.observables);
      }
      if (c.observables.empty() && !r.find(root, "observables")) {
        c.observables.push_back(c.init.dressed ? ObservableSpec::joint_excited().as_dressed()
                                               : ObservableSpec::joint_excited());
      } else if (c.observables.empty()) {
        r.error("observables", "at least one observable is needed");
      }
    }
    if (c.mode == ScenarioMode::driven_evolution) {
      if (const json* s = required("pulse")) parse_pulse(r, *s, c.pulse.emplace());
    }
  }
  if (const json* s = r.find(root, "output")) parse_output(r, *s, c.output);

  if (r.errors.empty()) check_semantics(r, c);
  if (!r.errors.empty()) throw ValidationError(r.errors);
  return c;
}

json system_to_json(const SystemParams& p) {
  json j;
  j["n_cavities"] = p.n_cavities;
  j["omega_c"] = p.omega_c;
  j["delta"] = p.delta;
  j["omega_q"] = p.omega_q;
  j["J"] = p.J;
  j["g_abs"] = p.g_abs;
  j["phases"] = p.phases;
  j["theta"] = p.theta;
  if (p.auto_n_max) {
    j["n_max"] = "auto";
  } else {
    j["n_max"] = p.n_max;
  }
  return j;
}

json observable_to_json(const ObservableSpec& o) {
  json j;
  j["kind"] = to_string(o.kind);
  if (o.kind == ObservableKind::state_projector) j["label"] = o.payload;
  if (o.kind == ObservableKind::photon_number) j["mode"] = o.payload;
  j["name"] = o.column_name();
  j["dressed"] = o.dressed;
  return j;
}

// Round to 12 significant digits, the precision of every emitted number.
double round12(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

std::string format12(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

std::string level_column(int i, const std::string& suffix = {}) { return "w" + std::to_string(i) + "0" + suffix; }

std::vector<double> relative_levels_of(const EigenDecomposition& eig, Index count) {
  std::vector<double> out;
  for (Index i = 0; i < std::min(count, eig.size()); ++i) out.push_back(eig.eigenvalues[i] - eig.eigenvalues[0]);
  return out;
}

std::vector<double> time_grid(const TimeSpec& t, double step) {
  const double spacing = step * static_cast<double>(t.output_stride);
  const auto count = static_cast<Index>(std::floor(t.t_max / spacing + 1e-9)) + 1;
  if (count < 2) throw ConfigError("time.t_max: shorter than one output interval");
  std::vector<double> times(static_cast<std::size_t>(count));
  for (Index k = 0; k < count; ++k) times[static_cast<std::size_t>(k)] = static_cast<double>(k) * spacing;
  return times;
}

void trajectory_table(const Trajectory& traj, Table& table, RunMetadata& md) {
  table.columns.push_back("time");
  table.data.push_back(traj.times);
  for (const auto& [name, values] : traj.observables) {
    table.columns.push_back(name);
    table.data.push_back(values);
    SeriesSummary s{name, 0.0, 0.0, 0.0};
    const auto it = std::max_element(values.begin(), values.end());
    s.max = *it;
    s.time_of_max = traj.times[static_cast<std::size_t>(it - values.begin())];
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    md.summaries.push_back(s);
  }
  md.norm_drift = traj.norm_drift;
}

bool needs_frame(const ScenarioConfig& c) {
  if (c.init.dressed) return true;
  if (c.pulse && c.pulse->calibration && c.pulse->calibration->dressed) return true;
  return std::any_of(c.observables.begin(), c.observables.end(), [](const ObservableSpec& o) { return o.dressed; });
}

QuantumState initial_state(const ScenarioConfig& c, const SystemParams& p, const DressedFrame* frame) {
  QuantumState psi = resolve_state_label(p, c.basis, c.init.label);
  return c.init.dressed ? frame->dress(psi) : psi;
}

void run_dynamics(const ScenarioConfig& c, const SystemParams& p, Table& table, RunMetadata& md) {
  const EigenDecomposition eig = diagonalize(p, c.basis);
  std::optional<DressedFrame> frame;
  if (needs_frame(c)) frame = dressed_frame(p, c.basis, eig);
  const DressedFrame* fp = frame ? &*frame : nullptr;
  const QuantumState psi0 = initial_state(c, p, fp);
  const auto observables = compile_observables(p, c.basis, c.observables, fp);
  md.relative_levels = relative_levels_of(eig, 12);

  if (c.mode == ScenarioMode::free_evolution) {
    const auto times = time_grid(*c.time, c.time->dt);
    md.dt = c.time->dt;
    trajectory_table(evolve_free(eig, psi0, times, observables), table, md);
    return;
  }

  PulseSpec pulse = resolve_carrier(c.pulse->pulse, eig);
  if (!c.pulse->pulse.carrier_resolved()) {
    md.carrier_directive = std::get<CarrierMidpoint>(c.pulse->pulse.omega_d).to_string();
  }
  if (const auto& cal = c.pulse->calibration) {
    QuantumState target = resolve_state_label(p, c.basis, cal->to);
    if (cal->dressed) target = fp->dress(target);
    pulse.area_scale = pi_pulse_area_scale(p, c.basis, pulse, psi0, target, eig);
    md.labels.emplace_back("calibration_target", cal->to + (cal->dressed ? " (dressed)" : ""));
  }
  DrivenOptions options;
  options.basis = c.basis;
  options.dt = c.time->dt > 0.0 ? c.time->dt : default_driven_step(eig, psi0, pulse.carrier(), options);
  const auto times = time_grid(*c.time, options.dt);
  const Trajectory traj = evolve_driven(p, eig, pulse, psi0, times, observables, options);
  md.dt = traj.dt;
  md.tau = pulse.tau;
  md.t0 = pulse.t0;
  md.area_scale = pulse.area_scale;
  md.carrier = pulse.carrier();
  md.retained_states = traj.retained_states;
  md.values.emplace_back("pulse_area", pulse.area());
  md.values.emplace_back("pulse_end", pulse.t0 + 3.0 * pulse.tau);
  trajectory_table(traj, table, md);
}

void run_sweep(const ScenarioConfig& c, const SystemParams& p, Table& table) {
  const auto grid = c.sweep->grid();
  SweepOptions options;
  options.basis = c.basis;
  options.labels = false;
  table.columns.push_back("omega_q");
  table.data.push_back(grid);
  auto append = [&](const SystemParams& q, const std::string& suffix) {
    const SweepResult r = sweep_levels(q, grid, c.sweep->n_levels, options);
    for (int i = 1; i < c.sweep->n_levels; ++i) {
      table.columns.push_back(level_column(i, suffix));
      std::vector<double> col(grid.size());
      for (std::size_t k = 0; k < grid.size(); ++k) col[k] = r.relative_levels(static_cast<Index>(k), i);
      table.data.push_back(std::move(col));
    }
  };
  append(p, "");
  if (c.sweep->alternate_phases) {
    SystemParams q = p;
    q.phases = *c.sweep->alternate_phases;
    append(q, "_alt");
  }
}

void run_gap(const ScenarioConfig& c, const SystemParams& p, Table& table, RunMetadata& md) {
  GapSearchOptions options;
  options.basis = c.basis;
  options.tolerance = c.gap->tolerance;
  options.coarse_points = c.gap->coarse_points;
  const AvoidedCrossing ac = find_min_gap(p, c.gap->levels, c.gap->min, c.gap->max, options);
  const bool crossing = classify_crossing(ac) == CrossingKind::crossing;
  const std::vector<std::pair<std::string, double>> row{{"omega_q_star", ac.omega_q_star},
                                                        {"gap_min", ac.gap_min},
                                                        {"omega_eff", ac.omega_eff},
                                                        {"lower", ac.level_pair.lower},
                                                        {"upper", ac.level_pair.upper},
                                                        {"is_crossing", crossing ? 1.0 : 0.0}};
  for (const auto& [name, value] : row) {
    table.columns.push_back(name);
    table.data.push_back({value});
    md.values.emplace_back(name, value);
  }
  md.labels.emplace_back("classification", to_string(classify_crossing(ac)));
  md.labels.emplace_back("below_lower", ac.labels_below[0].label);
  md.labels.emplace_back("below_upper", ac.labels_below[1].label);
  md.labels.emplace_back("above_lower", ac.labels_above[0].label);
  md.labels.emplace_back("above_upper", ac.labels_above[1].label);
}

void run_profile(const ScenarioConfig& c, const SystemParams& p, Table& table) {
  const auto grid = c.sweep->grid();
  std::vector<SupermodeTransform> transforms;
  for (double d : grid) {
    SystemParams q = p;
    q.delta = d;
    transforms.push_back(supermode_transform(q));
  }
  const auto& first = transforms.front();
  table.columns.push_back("delta");
  table.data.push_back(grid);
  const auto rows = static_cast<Index>(first.labels.size());
  for (Index m = 0; m < rows; ++m) {
    table.columns.push_back("w_" + lower(first.labels[static_cast<std::size_t>(m)]));
    std::vector<double> col;
    for (const auto& t : transforms) col.push_back(t.mode_frequencies[m]);
    table.data.push_back(std::move(col));
  }
  for (Index m = 0; m < rows; ++m) {
    for (Index n = 0; n < first.matrix.cols(); ++n) {
      table.columns.push_back("m_" + lower(first.labels[static_cast<std::size_t>(m)]) + "_" + std::to_string(n + 1));
      std::vector<double> col;
      for (const auto& t : transforms) col.push_back(t.matrix(m, n));
      table.data.push_back(std::move(col));
    }
  }
}

int tracked_levels(const ScenarioConfig& c) {
  if (c.sweep) return c.sweep->n_levels;
  if (c.gap) return c.gap->levels.upper + 2;
  return 8;
}

json metadata_json(const RunMetadata& md, bool include_wall_time) {
  json j;
  j["scenario_id"] = md.scenario_id;
  j["mode"] = to_string(md.mode);
  j["status"] = "ok";
  j["version"] = md.version;
  j["basis"] = to_string(md.basis);
  j["n_max"] = md.n_max;
  j["n_max_auto"] = md.n_max_auto;
  auto opt = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = round12(*v);
  };
  opt("dt", md.dt);
  opt("tau", md.tau);
  opt("t0", md.t0);
  opt("area_scale", md.area_scale);
  opt("carrier", md.carrier);
  if (md.carrier_directive) j["carrier_directive"] = *md.carrier_directive;
  if (!md.relative_levels.empty()) {
    json levels = json::array();
    for (double w : md.relative_levels) levels.push_back(round12(w));
    j["relative_levels"] = levels;
  }
  if (md.norm_drift) j["norm_drift"] = *md.norm_drift;
  if (md.retained_states) j["retained_states"] = *md.retained_states;
  if (!md.values.empty()) {
    json v;
    for (const auto& [k, x] : md.values) v[k] = round12(x);
    j["results"] = v;
  }
  if (!md.labels.empty()) {
    json v;
    for (const auto& [k, s] : md.labels) v[k] = s;
    j["labels"] = v;
  }
  if (!md.summaries.empty()) {
    json v;
    for (const auto& s : md.summaries) {
      v[s.name] = {{"max", round12(s.max)}, {"time_of_max", round12(s.time_of_max)}, {"mean", round12(s.mean)}};
    }
    j["series"] = v;
  }
  if (include_wall_time) j["wall_time_s"] = md.wall_time;
  j["config"] = md.config_json.empty() ? json::object() : json::parse(md.config_json);
  return j;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto at = s.find(sep, start);
    out.emplace_back(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

}  // namespace

const char* version() { return USCQED_VERSION; }

std::string to_string(ScenarioMode mode) {
  switch (mode) {
    case ScenarioMode::spectrum_sweep: return "spectrum_sweep";
    case ScenarioMode::free_evolution: return "free_evolution";
    case ScenarioMode::driven_evolution: return "driven_evolution";
    case ScenarioMode::gap_search: return "gap_search";
    case ScenarioMode::supermode_profile: return "supermode_profile";
  }
  return "?";
}

ScenarioMode parse_scenario_mode(std::string_view text) {
  for (auto m : {ScenarioMode::spectrum_sweep, ScenarioMode::free_evolution, ScenarioMode::driven_evolution,
                 ScenarioMode::gap_search, ScenarioMode::supermode_profile}) {
    if (text == to_string(m)) return m;
  }
  throw ConfigError("unknown mode \"" + std::string(text) +
                    "\" (spectrum_sweep, free_evolution, driven_evolution, gap_search, supermode_profile)");
}

std::string to_string(OutputFormat format) { return format == OutputFormat::csv ? "csv" : "json"; }

OutputFormat parse_output_format(std::string_view text) {
  if (text == "csv") return OutputFormat::csv;
  if (text == "json") return OutputFormat::json;
  throw ConfigError("unknown format \"" + std::string(text) + "\" (csv or json)");
}

std::vector<double> SweepSpec::grid() const {
  std::vector<double> g(static_cast<std::size_t>(points));
  for (Index k = 0; k < points; ++k) {
    g[static_cast<std::size_t>(k)] =
        k == points - 1 ? max : min + (max - min) * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  return g;
}

ValidationError::ValidationError(std::vector<std::string> errors)
    : ConfigError([&] {
        std::string joined;
        for (const auto& e : errors) joined += (joined.empty() ? "" : "\n") + e;
        return joined;
      }()),
      errors_(std::move(errors)) {}

ScenarioConfig validate_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw ValidationError({std::string("config: not valid JSON: ") + e.what()});
  }
  return parse_config(root);
}

std::string config_to_json(const ScenarioConfig& c, int indent) {
  json j;
  j["scenario_id"] = c.scenario_id;
  if (!c.description.empty()) j["description"] = c.description;
  j["mode"] = to_string(c.mode);
  j["system"] = system_to_json(c.system);
  j["basis"] = to_string(c.basis);
  if (c.sweep) {
    json s{{"min", c.sweep->min}, {"max", c.sweep->max}, {"points", c.sweep->points}, {"n_levels", c.sweep->n_levels}};
    if (c.sweep->alternate_phases) s["alternate_phases"] = *c.sweep->alternate_phases;
    j["sweep"] = s;
  }
  if (c.gap) {
    j["gap"] = {{"levels", {c.gap->levels.lower, c.gap->levels.upper}},
                {"min", c.gap->min},
                {"max", c.gap->max},
                {"tolerance", c.gap->tolerance},
                {"coarse_points", c.gap->coarse_points}};
  }
  if (c.mode == ScenarioMode::free_evolution || c.mode == ScenarioMode::driven_evolution) {
    j["init"] = {{"label", c.init.label}, {"dressed", c.init.dressed}};
  }
  if (c.pulse) {
    const PulseSpec& p = c.pulse->pulse;
    json s;
    s["amplitude"] = p.amplitude;
    if (p.carrier_resolved()) {
      s["omega_d"] = std::get<double>(p.omega_d);
    } else {
      s["omega_d"] = std::get<CarrierMidpoint>(p.omega_d).to_string();
    }
    s["t0"] = p.t0;
    s["tau"] = p.tau;
    s["norm"] = p.norm == EnvelopeNorm::literal ? "literal" : "sqrt_two_pi";
    if (c.pulse->calibration) {
      s["calibration"] = {{"to", c.pulse->calibration->to}, {"dressed", c.pulse->calibration->dressed}};
    } else {
      s["area_scale"] = p.area_scale;
    }
    j["pulse"] = s;
  }
  if (c.time) j["time"] = {{"t_max", c.time->t_max}, {"dt", c.time->dt}, {"output_stride", c.time->output_stride}};
  if (!c.observables.empty()) {
    json obs = json::array();
    for (const auto& o : c.observables) obs.push_back(observable_to_json(o));
    j["observables"] = obs;
  }
  j["output"] = {{"path", c.output.path}, {"format", to_string(c.output.format)}};
  return j.dump(indent);
}

const std::vector<double>& Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return data[i];
  }
  throw std::out_of_range("no column named " + name);
}

ScenarioResult compute_scenario(const ScenarioConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioResult out;
  RunMetadata& md = out.metadata;
  md.scenario_id = config.scenario_id;
  md.mode = config.mode;
  md.version = version();
  md.basis = config.basis;
  md.config_json = config_to_json(config, -1);

  SystemParams p = config.system;
  p.validate();
  if (p.auto_n_max) {
    p = resolve_truncation(p, config.basis, tracked_levels(config));
    md.n_max_auto = true;
  }
  md.n_max = p.n_max;

  switch (config.mode) {
    case ScenarioMode::spectrum_sweep: run_sweep(config, p, out.table); break;
    case ScenarioMode::gap_search: run_gap(config, p, out.table, md); break;
    case ScenarioMode::supermode_profile: run_profile(config, p, out.table); break;
    case ScenarioMode::free_evolution:
    case ScenarioMode::driven_evolution: run_dynamics(config, p, out.table, md); break;
  }
  for (std::size_t i = 0; i < out.table.columns.size(); ++i) {
    for (double v : out.table.data[i]) {
      if (!std::isfinite(v)) throw ConvergenceError("non-finite value in column " + out.table.columns[i]);
    }
  }
  md.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

ScenarioConfig apply_overrides(ScenarioConfig config, const RunOptions& options) {
  if (options.out_dir) config.output.path = *options.out_dir;
  if (options.format) config.output.format = *options.format;
  if (options.n_max) {
    config.system.n_max = *options.n_max;
    config.system.auto_n_max = false;
    const auto errors = config.system.validation_errors();
    if (!errors.empty()) throw ValidationError(errors);
  }
  return config;
}

RunOutput run_scenario(const ScenarioConfig& config_in, const RunOptions& options) {
  const ScenarioConfig config = apply_overrides(config_in, options);
  namespace fs = std::filesystem;
  const fs::path dir(config.output.path);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  RunOutput out;
  out.metadata_path = (dir / (config.scenario_id + ".meta.json")).string();
  out.data_path = (dir / (config.scenario_id + "." + to_string(config.output.format))).string();
  try {
    out.result = compute_scenario(config);
  } catch (const std::exception& e) {
    json j;
    j["scenario_id"] = config.scenario_id;
    j["mode"] = to_string(config.mode);
    j["status"] = "error";
    j["error"] = e.what();
    j["version"] = version();
    j["config"] = json::parse(config_to_json(config, -1));
    write_file(out.metadata_path, j.dump(2) + "\n");
    throw;
  }
  const Table& table = out.result.table;
  write_file(out.data_path, config.output.format == OutputFormat::csv ? format_csv(table) : format_table_json(table) + "\n");
  write_file(out.metadata_path, format_metadata(out.result.metadata, !options.deterministic) + "\n");
  return out;
}

std::string format_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + table.columns[i];
  out += "\n";
  for (Index r = 0; r < table.rows(); ++r) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      if (i) out += ",";
      out += format12(table.data[i][static_cast<std::size_t>(r)]);
    }
    out += "\n";
  }
  return out;
}

std::string format_table_json(const Table& table, int indent) {
  json j;
  j["columns"] = table.columns;
  json data;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    json col = json::array();
    for (double v : table.data[i]) col.push_back(round12(v));
    data[table.columns[i]] = col;
  }
  j["data"] = data;
  return j.dump(indent);
}

std::string format_metadata(const RunMetadata& metadata, bool include_wall_time, int indent) {
  return metadata_json(metadata, include_wall_time).dump(indent);
}

Table parse_csv(std::string_view text, const std::vector<std::string>& required) {
  Table t;
  std::vector<std::string> lines;
  for (auto& line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (!lines.empty()) t.columns = split(lines.front(), ',');
  std::vector<std::string> missing;
  for (const auto& name : required) {
    if (std::find(t.columns.begin(), t.columns.end(), name) == t.columns.end()) missing.push_back(name);
  }
  if (!missing.empty()) {
    std::string msg = "missing columns:";
    for (const auto& m : missing) msg += " " + m;
    throw ConfigError(msg);
  }
  if (lines.empty()) throw ConfigError("empty CSV: no header row");
  t.data.assign(t.columns.size(), {});
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r], ',');
    if (cells.size() != t.columns.size()) {
      throw ConfigError("row " + std::to_string(r) + ": expected " + std::to_string(t.columns.size()) + " values");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto v = parse_plain_number(cells[i]);
      if (!v) throw ConfigError("row " + std::to_string(r) + ", column " + t.columns[i] + ": not a number");
      t.data[i].push_back(*v);
    }
  }
  return t;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path);
  return ss.str();
}

}  // namespace uscqed
