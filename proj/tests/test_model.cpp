#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "uscqed/spectrum.hpp"

using namespace uscqed;
constexpr double kPi = std::numbers::pi;

namespace {

SystemParams random_params(std::mt19937& rng, int N) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SystemParams p = N == 2 ? SystemParams::two_cavity() : SystemParams::three_cavity(0.6 * u(rng) - 0.2);
  p.omega_q = {0.3 + 0.6 * u(rng), 0.3 + 0.6 * u(rng)};
  p.J = 0.01 + 0.1 * u(rng);
  p.g_abs = 0.5 * u(rng);
  p.theta = kPi * u(rng);
  p.phases = {u(rng) < 0.5 ? 0.0 : kPi, u(rng) < 0.5 ? 0.0 : kPi};
  p.n_max = 3;
  return p;
}

}  // namespace

TEST_CASE("bare Hamiltonian matches the Kronecker-product oracle") {
  std::mt19937 rng(11);
  for (int N : {2, 3}) {
    for (int trial = 0; trial < 4; ++trial) {
      const auto p = random_params(rng, N);
      const auto H = build_bare_hamiltonian(p);
      const Eigen::MatrixXcd ref = oracle::bare_hamiltonian(p);
      REQUIRE(ref.rows() == H.dim());
      CHECK((H.matrix() - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("builders are Hermitian for all supported phases") {
  std::mt19937 rng(3);
  for (int N : {2, 3}) {
    for (int trial = 0; trial < 6; ++trial) {
      const auto p = random_params(rng, N);
      for (Basis b : {Basis::bare, Basis::supermode}) CHECK(build_hamiltonian(p, b).hermiticity_defect() < 1e-14);
    }
  }
}

TEST_CASE("phase validation") {
  auto p = SystemParams::two_cavity();
  p.phases = {0.0, kPi / 3.0};
  CHECK_THROWS_AS(p.validate(), UnsupportedParameter);
  p.phases = {0.0, kPi};
  p.J = -0.1;
  const auto errors = p.validation_errors();
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].rfind("system.J", 0) == 0);
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("three-cavity transform is orthogonal and diagonalizes the hopping matrix") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> uj(0.005, 0.2), ud(-0.9, 0.9);
  for (int draw = 0; draw < 50; ++draw) {
    auto p = SystemParams::three_cavity(ud(rng));
    p.J = uj(rng);
    const auto t = supermode_transform(p);
    const Eigen::MatrixXd& M = t.matrix;
    CHECK((M * M.transpose() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
    const Eigen::MatrixXd h = oracle::hopping_matrix(p);
    for (int r = 0; r < 3; ++r) {
      const Eigen::VectorXd row = M.row(r).transpose();
      CHECK((h * row - t.mode_frequencies[r] * row).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(t.mode_frequencies[0] < t.mode_frequencies[1]);
    CHECK(t.mode_frequencies[1] < t.mode_frequencies[2]);
  }
}

TEST_CASE("zero-detuning transform rows") {
  const auto t = supermode_transform(SystemParams::three_cavity(0.0));
  const double r = 1.0 / std::sqrt(2.0);
  const Index a = t.row_of("A");
  CHECK(t.matrix(a, 0) == doctest::Approx(-r));
  CHECK(t.matrix(a, 1) == doctest::Approx(0.0));
  CHECK(t.matrix(a, 2) == doctest::Approx(r));
  // N = 2: w_A = w_c - J, w_S = w_c + J
  const auto t2 = supermode_transform(SystemParams::two_cavity());
  CHECK(t2.mode_frequencies[t2.row_of("A")] == doctest::Approx(0.95));
  CHECK(t2.mode_frequencies[t2.row_of("S")] == doctest::Approx(1.05));
}

TEST_CASE("g = 0 spectrum is the sum of normal-mode and qubit energies") {
  for (int N : {2, 3}) {
    auto p = (N == 2 ? SystemParams::two_cavity() : SystemParams::three_cavity(0.3)).with_omega_q(0.37);
    p.g_abs = 0.0;
    p.n_max = 2;
    const auto t = supermode_transform(p);
    std::vector<double> expected;
    const int levels = 3;
    // occupations 0..n_max per normal mode and g/e per qubit
    const auto space = bare_space(p);
    for (Index b = 0; b < space->total_dim(); ++b) {
      const auto o = space->occupations(b);
      double e = 0.0;
      for (int k = 0; k < N; ++k) e += o[k] * t.mode_frequencies[k];
      e += 0.37 * (o[N] + o[N + 1]);
      expected.push_back(e);
    }
    std::sort(expected.begin(), expected.end());
    const auto eig = diagonalize(p, Basis::bare);
    // Truncation mixes only states above the first truncated level; compare the lowest few.
    for (int i = 0; i < levels + 4; ++i) CHECK(eig.eigenvalues[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("global phase flip leaves the spectrum unchanged") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    auto p = random_params(rng, trial % 2 ? 3 : 2);
    auto q = p;
    for (auto& phi : q.phases) phi = phi == 0.0 ? kPi : 0.0;
    const auto a = diagonalize(p, Basis::bare).eigenvalues;
    const auto b = diagonalize(q, Basis::bare).eigenvalues;
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("reflection commutes with the Hamiltonian") {
  for (int N : {2, 3}) {
    for (double phi2 : {0.0, kPi}) {
      auto p = (N == 2 ? SystemParams::two_cavity() : SystemParams::three_cavity(0.2)).with_n_max(3);
      p.phases = {0.0, phi2};
      for (Basis basis : {Basis::bare, Basis::supermode}) {
        const auto r = reflection_symmetry(p, basis);
        REQUIRE(r.has_value());
        const Index n = static_cast<Index>(r->image.size());
        Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(n, n);
        for (Index b = 0; b < n; ++b) P(r->image[static_cast<std::size_t>(b)], b) = r->sign[static_cast<std::size_t>(b)];
        const Eigen::MatrixXcd H = build_hamiltonian(p, basis).matrix();
        CHECK((P * H - H * P).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
  auto p = SystemParams::two_cavity();
  p.omega_q = {0.5, 0.6};
  CHECK_FALSE(reflection_symmetry(p, Basis::bare).has_value());
}

TEST_CASE("drive quadrature: a_1 + a_1^dag in both bases") {
  const auto p = SystemParams::two_cavity().with_n_max(3);
  const auto psi_bare = resolve_state_label(p, Basis::bare, "1_1");
  const auto psi_super = resolve_state_label(p, Basis::supermode, "1_1");
  // <1_1|X_1|vac> = 1 in either representation
  CHECK(std::abs(overlap(psi_bare, apply(drive_quadrature(p, Basis::bare), resolve_state_label(p, Basis::bare, "vac")))) ==
        doctest::Approx(1.0));
  CHECK(std::abs(overlap(psi_super,
                         apply(drive_quadrature(p, Basis::supermode), resolve_state_label(p, Basis::supermode, "vac")))) ==
        doctest::Approx(1.0));
}

TEST_CASE("labelled states") {
  const auto p3 = SystemParams::three_cavity();
  const auto a = resolve_state_label(p3, Basis::bare, "1_A");
  const auto space = a.space();
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(a.amplitudes()[space->flat_index(std::vector<int>{0, 0, 1, 0, 0})].real() == doctest::Approx(r));
  CHECK(a.amplitudes()[space->flat_index(std::vector<int>{1, 0, 0, 0, 0})].real() == doctest::Approx(-r));
  CHECK(a.norm() == doctest::Approx(1.0));
  CHECK_THROWS_AS(resolve_state_label(p3, Basis::bare, "1_4"), ConfigError);
  CHECK_THROWS_AS(resolve_state_label(p3, Basis::bare, "1_B"), ConfigError);
  CHECK_THROWS_AS(resolve_state_label(p3, Basis::bare, "nonsense"), ConfigError);
  CHECK_THROWS_AS(resolve_state_label(p3, Basis::bare, "bare:9,0,0,g,g"), std::out_of_range);
  // a two-photon normal-mode state expressed in the bare basis keeps unit norm
  const auto two = resolve_state_label(SystemParams::two_cavity(), Basis::bare, "supermode:2,0,g,g");
  CHECK(two.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("carrier midpoint directives") {
  const auto m = CarrierMidpoint::parse("mid:(3+4),5");
  Eigen::VectorXd w(6);
  w << 0.0, 0.1, 0.2, 1.0, 1.2, 2.0;
  CHECK(m.resolve(w) == doctest::Approx((1.1 + 2.0) / 2.0));
  CHECK(m.to_string() == "mid:(3+4),5");
  CHECK(CarrierMidpoint::parse("mid:3,4").resolve(w) == doctest::Approx(1.1));
  CHECK_THROWS_AS(CarrierMidpoint::parse("3,4"), ConfigError);
  CHECK_THROWS_AS(CarrierMidpoint::parse("mid:0,4"), ConfigError);
  CHECK_THROWS_AS(CarrierMidpoint::parse("mid:4"), ConfigError);
}

TEST_CASE("pulse envelope and area") {
  PulseSpec pulse;
  pulse.amplitude = 0.3;
  pulse.tau = 2.0;
  pulse.t0 = 20.0;
  CHECK(pulse.denominator() == doctest::Approx(2.0 * std::sqrt(2.0) * kPi));
  pulse.norm = EnvelopeNorm::sqrt_two_pi;
  CHECK(pulse.denominator() == doctest::Approx(2.0 * std::sqrt(2.0 * kPi)));
  // trapezoid integral of the envelope
  double sum = 0.0;
  const double h = 1e-3;
  for (double t = 0.0; t <= 40.0; t += h) sum += pulse_envelope(pulse, t) * h;
  CHECK(sum == doctest::Approx(pulse.area()).epsilon(1e-6));
  pulse.omega_d = CarrierMidpoint::parse("mid:1,2");
  CHECK_THROWS_AS(pulse.carrier(), ContractViolation);
  pulse.tau = -1.0;
  CHECK_THROWS_AS(pulse.validate(), ConfigError);
}
