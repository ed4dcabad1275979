#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "uscqed/dynamics.hpp"

using namespace uscqed;
constexpr double kPi = std::numbers::pi;

TEST_CASE("rabi_period") {
  CHECK(rabi_period(8e-3) == doctest::Approx(196.35).epsilon(1e-4));
  CHECK(rabi_period(1e-3) == doctest::Approx(1570.8).epsilon(1e-4));
  CHECK(rabi_period(1.0) == doctest::Approx(kPi / 2.0));
  CHECK_THROWS_AS(rabi_period(0.0), ConfigError);
  CHECK_THROWS_AS(rabi_period(-1.0), ConfigError);
}

TEST_CASE("uniform_times") {
  const auto t = uniform_times(10.0, 11);
  REQUIRE(t.size() == 11);
  CHECK(t.front() == 0.0);
  CHECK(t.back() == 10.0);
  CHECK_THROWS_AS(uniform_times(10.0, 1), ConfigError);
  CHECK_THROWS_AS(uniform_times(0.0, 5), ConfigError);
}

TEST_CASE("occupation probabilities of labelled states") {
  const auto p2 = SystemParams::two_cavity().with_n_max(3);
  for (Basis b : {Basis::bare, Basis::supermode}) {
    const auto psi = resolve_state_label(p2, b, "1_A");
    CHECK(occupation_probability(p2, psi, b, ObservableSpec::projector("1_A")) == doctest::Approx(1.0));
    CHECK(occupation_probability(p2, psi, b, ObservableSpec::projector("1_1")) == doctest::Approx(0.5));
    CHECK(occupation_probability(p2, psi, b, ObservableSpec::photon_number("A")) == doctest::Approx(1.0));
    CHECK(occupation_probability(p2, psi, b, ObservableSpec::photon_number("1")) == doctest::Approx(0.5));
    const auto ee = resolve_state_label(p2, b, "ee");
    CHECK(occupation_probability(p2, ee, b, ObservableSpec::joint_excited()) == doctest::Approx(1.0));
  }
  const auto p3 = SystemParams::three_cavity().with_n_max(2);
  const auto psi = resolve_state_label(p3, Basis::supermode, "1_A");
  CHECK(occupation_probability(p3, psi, Basis::supermode, ObservableSpec::projector("1_1")) == doctest::Approx(0.5));
  CHECK(occupation_probability(p3, psi, Basis::supermode, ObservableSpec::projector("1_3")) == doctest::Approx(0.5));
  CHECK(occupation_probability(p3, psi, Basis::supermode, ObservableSpec::projector("1_2")) == doctest::Approx(0.0));
}

TEST_CASE("observable naming and errors") {
  CHECK(ObservableSpec::projector("1_A").default_name() == "p_1_a");
  CHECK(ObservableSpec::projector("ee").default_name() == "p_ee_full");
  CHECK(ObservableSpec::joint_excited().as_dressed().default_name() == "p_ee_dressed");
  CHECK(ObservableSpec::photon_number("S2").default_name() == "n_s2");
  CHECK(ObservableSpec::joint_excited("custom").column_name() == "custom");
  CHECK(parse_observable_kind("photon_number") == ObservableKind::photon_number);
  CHECK_THROWS_AS(parse_observable_kind("nope"), ConfigError);

  const auto p = SystemParams::two_cavity().with_n_max(2);
  CHECK_THROWS_AS(Observable(p, Basis::bare, ObservableSpec::projector("1_Q")), ConfigError);
  CHECK_THROWS_AS(Observable(p, Basis::bare, ObservableSpec::photon_number("Z")), ConfigError);
  CHECK_THROWS_AS(Observable(p, Basis::bare, ObservableSpec::photon_number("1").as_dressed()), ConfigError);
  const Observable o(p, Basis::bare, ObservableSpec::joint_excited());
  CHECK_THROWS_AS(o.evaluate(resolve_state_label(p, Basis::supermode, "vac")), ModeTypeError);
}

TEST_CASE("free evolution matches a stepwise power-series exponential") {
  // dim 4 * 4 * 4 = 64
  auto p = SystemParams::two_cavity().with_omega_q(0.63).with_n_max(3);
  for (Basis b : {Basis::bare, Basis::supermode}) {
    const auto H = build_hamiltonian(p, b);
    const auto psi0 = resolve_state_label(p, b, "1_1");
    for (double t : {0.7, 13.0, 61.5}) {
      const std::vector<double> times{0.0, t};
      const auto traj = evolve_free(H, psi0, times, std::vector<Observable>{});
      const Eigen::VectorXcd ref = oracle::series_evolve(H.matrix(), psi0.amplitudes(), t, static_cast<int>(t / 0.05) + 1);
      CHECK((traj.final_state.amplitudes() - ref).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("free evolution conserves norm and energy") {
  const auto p = SystemParams::two_cavity().with_omega_q(0.6293008);
  const auto eig = diagonalize(p, Basis::supermode);
  const auto H = build_hamiltonian(p, Basis::supermode);
  const auto psi0 = resolve_state_label(p, Basis::supermode, "1_1");
  const double e0 = expectation(psi0, H).real();
  for (double t : {50.0, 187.5, 1000.0}) {
    const std::vector<double> times{0.0, t};
    const auto traj = evolve_free(eig, psi0, times, std::vector<Observable>{});
    CHECK(traj.norm_drift <= 1e-6);
    CHECK(std::abs(expectation(traj.final_state, H).real() - e0) <= 1e-8);
  }
}

TEST_CASE("free evolution input checks") {
  const auto p = SystemParams::two_cavity().with_n_max(2);
  const auto eig = diagonalize(p, Basis::bare);
  const auto psi = resolve_state_label(p, Basis::bare, "1_1");
  const std::vector<double> bad{0.0, 2.0, 1.0};
  CHECK_THROWS_AS(evolve_free(eig, psi, bad, std::vector<Observable>{}), ConfigError);
  const QuantumState loose(psi.space(), 2.0 * psi.amplitudes());
  const std::vector<double> ok{0.0, 1.0};
  CHECK_THROWS_AS(evolve_free(eig, loose, ok, std::vector<Observable>{}), ContractViolation);
  CHECK_THROWS_AS(evolve_free(eig, resolve_state_label(p, Basis::supermode, "vac"), ok, std::vector<Observable>{}),
                  ModeTypeError);
  const auto traj = evolve_free(eig, psi, ok, std::vector<Observable>{});
  CHECK_THROWS_AS(traj.series("missing"), std::out_of_range);
}

TEST_CASE("empty array transfers a photon between cavities in pi/(2J)") {
  auto p = SystemParams::two_cavity().with_n_max(2);
  p.g_abs = 0.0;
  const auto obs = compile_observables(p, Basis::bare, std::vector<ObservableSpec>{ObservableSpec::projector("1_2")});
  const std::vector<double> times{0.0, kPi / (2.0 * p.J)};
  const auto traj = evolve_free(build_hamiltonian(p, Basis::bare), resolve_state_label(p, Basis::bare, "1_1"), times, obs);
  CHECK(std::abs(traj.series("p_1_2").back() - 1.0) <= 1e-6);
  CHECK(traj.series("p_1_2").front() == doctest::Approx(0.0));
}

TEST_CASE("joint emission is reversible") {
  const auto p = SystemParams::two_cavity().with_omega_q(0.6293008);
  const auto eig = diagonalize(p, Basis::supermode);
  const auto f = dressed_frame(p, Basis::supermode, eig);
  const auto obs = compile_observables(p, Basis::supermode,
                                       std::vector<ObservableSpec>{ObservableSpec::projector("1_A").as_dressed()}, &f);
  const auto psi0 = f.dress(resolve_state_label(p, Basis::supermode, "ee"));
  const auto times = uniform_times(400.0, 801);
  const auto traj = evolve_free(eig, psi0, times, obs);
  const auto& pa = traj.series("p_1_a_dressed");
  CHECK(*std::max_element(pa.begin(), pa.end()) >= 0.9);
}

namespace {

// Schroedinger-picture RK4 on the full space with a small fixed step.
Eigen::VectorXcd brute_driven(const SystemParams& p, const PulseSpec& pulse, Eigen::VectorXcd psi, double t_end, double h) {
  const Eigen::MatrixXcd H0 = build_hamiltonian(p, Basis::bare).matrix();
  const Eigen::MatrixXcd X = drive_quadrature(p, Basis::bare).matrix();
  auto f = [&](double t, const Eigen::VectorXcd& y) -> Eigen::VectorXcd {
    const double s = pulse_envelope(pulse, t) * std::cos(pulse.carrier() * t);
    return Complex(0, -1) * (H0 * y + s * (X * y));
  };
  const int steps = static_cast<int>(std::ceil(t_end / h));
  const double dt = t_end / steps;
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const Eigen::VectorXcd k1 = f(t, psi);
    const Eigen::VectorXcd k2 = f(t + dt / 2, psi + dt / 2 * k1);
    const Eigen::VectorXcd k3 = f(t + dt / 2, psi + dt / 2 * k2);
    const Eigen::VectorXcd k4 = f(t + dt, psi + dt * k3);
    psi += dt / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return psi;
}

}  // namespace

TEST_CASE("driven evolution matches a Schroedinger-picture integration") {
  const auto p = SystemParams::two_cavity().with_omega_q(0.63).with_n_max(3);
  PulseSpec pulse;
  pulse.amplitude = 0.8;
  pulse.tau = 2.0;
  pulse.t0 = 14.0;
  pulse.omega_d = 0.98;
  DrivenOptions options;
  options.basis = Basis::bare;
  options.energy_window = 1e3;  // keep every eigenstate
  const auto psi0 = resolve_state_label(p, Basis::bare, "vac");
  const std::vector<double> times{0.0, 30.0};
  const auto traj = evolve_driven(p, pulse, psi0, times, std::vector<Observable>{}, options);
  const Eigen::VectorXcd ref = brute_driven(p, pulse, psi0.amplitudes(), 30.0, 2e-3);
  CHECK((traj.final_state.amplitudes() - ref).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(traj.norm_drift <= 1e-6);
  CHECK(traj.retained_states == 64);
}

TEST_CASE("zero drive reproduces free evolution") {
  const auto p = SystemParams::two_cavity().with_omega_q(0.6293008);
  PulseSpec pulse;
  pulse.amplitude = 0.0;
  pulse.tau = 5.0;
  pulse.t0 = 40.0;
  pulse.omega_d = CarrierMidpoint::parse("mid:3,4");
  const auto eig = diagonalize(p, Basis::supermode);
  const auto f = dressed_frame(p, Basis::supermode, eig);
  const std::vector<ObservableSpec> specs{ObservableSpec::joint_excited().as_dressed(),
                                          ObservableSpec::projector("1_1")};
  const auto obs = compile_observables(p, Basis::supermode, specs, &f);
  const auto psi0 = f.dress(resolve_state_label(p, Basis::supermode, "1_A"));
  const auto times = uniform_times(200.0, 101);
  const auto driven = evolve_driven(p, pulse, psi0, times, obs);
  const auto free = evolve_free(eig, psi0, times, obs);
  for (std::size_t o = 0; o < specs.size(); ++o) {
    for (std::size_t i = 0; i < times.size(); ++i) {
      CHECK(std::abs(driven.observables[o].second[i] - free.observables[o].second[i]) <= 1e-9);
    }
  }
  REQUIRE(driven.carrier.has_value());
  CHECK(*driven.carrier == doctest::Approx((eig.eigenvalues[3] + eig.eigenvalues[4]) / 2.0 - eig.eigenvalues[0]));
}

TEST_CASE("driven evolution input checks and step failure") {
  const auto p = SystemParams::two_cavity().with_n_max(2);
  PulseSpec pulse;
  pulse.amplitude = 0.5;
  pulse.tau = 1.0;
  pulse.t0 = 3.0;
  const auto psi0 = resolve_state_label(p, Basis::supermode, "vac");
  const std::vector<double> short_grid{0.0, 20.0};
  CHECK_THROWS_AS(evolve_driven(p, pulse, psi0, short_grid, std::vector<Observable>{}), ConfigError);  // t0 < 6 tau
  pulse.t0 = 10.0;
  const std::vector<double> early{0.0, 12.0};
  CHECK_THROWS_AS(evolve_driven(p, pulse, psi0, early, std::vector<Observable>{}), ConfigError);
  DrivenOptions coarse;
  coarse.dt = 2.0;
  pulse.amplitude = 40.0;
  CHECK_THROWS_AS(evolve_driven(p, pulse, psi0, short_grid, std::vector<Observable>{}, coarse), StepSizeError);
}

TEST_CASE("pi-pulse calibration") {
  auto p = SystemParams::two_cavity().with_omega_q(0.6293008);
  const auto eig = diagonalize(p, Basis::supermode);
  const auto f = dressed_frame(p, Basis::supermode, eig);
  PulseSpec pulse;
  pulse.amplitude = 0.042;
  pulse.tau = 100.0;
  pulse.t0 = 800.0;
  pulse.omega_d = CarrierMidpoint::parse("mid:3,4");
  const auto from = f.dress(resolve_state_label(p, Basis::supermode, "vac"));
  const auto to = f.dress(resolve_state_label(p, Basis::supermode, "1_A"));
  const double s = pi_pulse_area_scale(p, Basis::supermode, pulse, from, to, eig);
  CHECK(s > 0.0);
  // the scale is linear in 1/A
  pulse.amplitude *= 2.0;
  CHECK(pi_pulse_area_scale(p, Basis::supermode, pulse, from, to, eig) == doctest::Approx(s / 2.0));

  p.g_abs = 0.0;
  p.n_max = 2;
  const auto eig0 = diagonalize(p, Basis::supermode);
  pulse.omega_d = 1.0;
  CHECK_THROWS_AS(pi_pulse_area_scale(p, Basis::supermode, pulse, resolve_state_label(p, Basis::supermode, "vac"),
                                      resolve_state_label(p, Basis::supermode, "ee"), eig0),
                  ConfigError);
}
