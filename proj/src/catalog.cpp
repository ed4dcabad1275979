// Canonical figure scenarios. Qubit frequencies sit at the anticrossings found
// by find_min_gap at n_max = 6 in the supermode basis.

#include <numbers>

#include "uscqed/scenario.hpp"

namespace uscqed {

namespace {

constexpr double kTwoCavityAnticrossing = 0.6293008;    // levels (3,4)
constexpr double kThreeCavityAnticrossing = 0.6619058;  // levels (4,5), Delta = 0
constexpr double kDetunedAnticrossing = 0.6606982;      // levels (4,5), Delta = 0.5

struct Entry {
  const char* id;
  const char* figure;
  const char* description;
};

constexpr Entry kEntries[] = {
    {"fig2a", "Fig. 2(a)", "Two cavities, phases (0, pi): level differences w_i0 against omega_q"},
    {"fig2b", "Fig. 2(b)", "Two cavities: zoom on the w_A/2 and w_S/2 region, phases (0, pi) and (0, 0) (_alt columns)"},
    {"fig3a", "Fig. 3(a)", "Two cavities: vacuum Rabi oscillation from one antisymmetric-mode photon at the anticrossing"},
    {"fig3b", "Fig. 3(b)", "Two cavities: narrow Gaussian pulse on cavity 1 from the ground state, A = 0.042, w_d = mid(3,4)"},
    {"fig4a", "Fig. 4(a)", "Two cavities: hopping and joint absorption from one photon in cavity 1"},
    {"fig4b", "Fig. 4(b)", "Two cavities: short Gaussian pulse on cavity 1 from the ground state, A = 0.27"},
    {"fig5b", "Fig. 5(b)", "Three cavities: normal-mode transform and frequencies against the central detuning"},
    {"fig6", "Fig. 6", "Three cavities, Delta = 0: level differences w_i0 against omega_q"},
    {"fig7a", "Fig. 7(a)", "Three cavities, Delta = 0: joint absorption from one antisymmetric-mode photon"},
    {"fig7b", "Fig. 7(b)", "Three cavities, Delta = 0: dynamics from one photon in cavity 1"},
    {"fig7c", "Fig. 7(c)", "Three cavities, Delta/omega_c = 0.5: dynamics from one photon in cavity 1"},
};

// Dressed projectors carry the plain names; the literal bare-state ones get a _bare suffix.
std::vector<ObservableSpec> occupations(const std::vector<std::string>& labels) {
  std::vector<ObservableSpec> dressed;
  std::vector<ObservableSpec> bare;
  for (const auto& label : labels) {
    ObservableSpec spec = label == "ee" ? ObservableSpec::joint_excited() : ObservableSpec::projector(label);
    const std::string name = spec.default_name();
    ObservableSpec d = spec.as_dressed();
    d.name = name;
    dressed.push_back(d);
    spec.name = name + "_bare";
    bare.push_back(spec);
  }
  dressed.insert(dressed.end(), bare.begin(), bare.end());
  return dressed;
}

ScenarioConfig base(const char* id, ScenarioMode mode, SystemParams p) {
  ScenarioConfig c;
  c.scenario_id = id;
  c.mode = mode;
  c.system = std::move(p);
  for (const auto& e : kEntries) {
    if (c.scenario_id == e.id) c.description = e.description;
  }
  return c;
}

ScenarioConfig sweep(const char* id, SystemParams p, double lo, double hi, Index points, int n_levels) {
  ScenarioConfig c = base(id, ScenarioMode::spectrum_sweep, std::move(p));
  c.sweep = SweepSpec{lo, hi, points, n_levels, std::nullopt};
  return c;
}

ScenarioConfig free_run(const char* id, SystemParams p, const char* init, double t_max, double dt,
                        const std::vector<std::string>& labels) {
  ScenarioConfig c = base(id, ScenarioMode::free_evolution, std::move(p));
  c.init = {init, true};
  c.time = TimeSpec{t_max, dt, 1};
  c.observables = occupations(labels);
  return c;
}

ScenarioConfig driven(const char* id, double amplitude, const char* carrier, double tau, const char* target,
                      double t_after, Index stride, const std::vector<std::string>& labels) {
  ScenarioConfig c = base(id, ScenarioMode::driven_evolution, SystemParams::two_cavity().with_omega_q(kTwoCavityAnticrossing));
  c.init = {"vac", true};
  PulseConfig pc;
  pc.pulse.amplitude = amplitude;
  pc.pulse.omega_d = CarrierMidpoint::parse(carrier);
  pc.pulse.tau = tau;
  pc.pulse.t0 = 8.0 * tau;
  pc.calibration = CalibrationSpec{target, true};
  c.pulse = pc;
  c.time = TimeSpec{pc.pulse.t0 + t_after, 0.0, stride};
  c.observables = occupations(labels);
  return c;
}

}  // namespace

std::vector<CatalogEntry> list_scenarios() {
  std::vector<CatalogEntry> out;
  for (const auto& e : kEntries) out.push_back({e.id, e.figure, e.description});
  return out;
}

bool is_canonical(std::string_view id) {
  for (const auto& e : kEntries) {
    if (id == e.id) return true;
  }
  return false;
}

ScenarioConfig canonical_scenario(std::string_view id) {
  const auto two = SystemParams::two_cavity();
  const auto three = SystemParams::three_cavity();
  const double fast_tau = 0.1 * std::numbers::pi / (2.0 * two.J);

  if (id == "fig2a") return sweep("fig2a", two, 0.4, 0.9, 251, 8);
  if (id == "fig2b") {
    ScenarioConfig c = sweep("fig2b", two, 0.58, 0.74, 321, 6);
    c.sweep->alternate_phases = std::vector<double>{0.0, 0.0};
    return c;
  }
  if (id == "fig3a") {
    return free_run("fig3a", two.with_omega_q(kTwoCavityAnticrossing), "1_A", 400.0, 0.1, {"1_A", "1_1", "ee"});
  }
  if (id == "fig3b") return driven("fig3b", 4.2e-2, "mid:3,4", 100.0, "1_A", 1200.0, 50, {"1_A", "1_1", "ee"});
  if (id == "fig4a") {
    return free_run("fig4a", two.with_omega_q(kTwoCavityAnticrossing), "1_1", 400.0, 0.1, {"1_1", "1_2", "ee"});
  }
  if (id == "fig4b") return driven("fig4b", 0.27, "mid:(3+4),5", fast_tau, "1_1", 400.0, 20, {"1_1", "1_2", "ee"});
  if (id == "fig5b") {
    ScenarioConfig c = base("fig5b", ScenarioMode::supermode_profile, three);
    c.sweep = SweepSpec{0.0, 1.0, 101, 8, std::nullopt};
    return c;
  }
  if (id == "fig6") return sweep("fig6", three, 0.5, 0.75, 126, 8);
  if (id == "fig7a") {
    return free_run("fig7a", three.with_omega_q(kThreeCavityAnticrossing), "1_A", 3300.0, 1.0,
                    {"1_A", "1_1", "1_2", "1_3", "ee"});
  }
  if (id == "fig7b") {
    return free_run("fig7b", three.with_omega_q(kThreeCavityAnticrossing), "1_1", 3300.0, 1.0,
                    {"1_1", "1_2", "1_3", "ee"});
  }
  if (id == "fig7c") {
    return free_run("fig7c", SystemParams::three_cavity(0.5).with_omega_q(kDetunedAnticrossing), "1_1", 7000.0, 2.0,
                    {"1_1", "1_2", "1_3", "ee"});
  }
  throw ConfigError("unknown scenario id \"" + std::string(id) + "\"; run `simulate list` for the catalog");
}

}  // namespace uscqed
