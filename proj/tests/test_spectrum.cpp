#include <doctest.h>

#include <numbers>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "uscqed/spectrum.hpp"

using namespace uscqed;

namespace {

Eigen::VectorXd dense_levels(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// The two bases truncate differently, so each is compared with a dense solve of
// its own matrix; the bare one is built independently.
Eigen::VectorXd oracle_levels(const SystemParams& p, Basis b) {
  return dense_levels(b == Basis::bare ? oracle::bare_hamiltonian(p) : build_hamiltonian(p, b).matrix());
}

}  // namespace

TEST_CASE("sector-wise lowest levels agree with a plain dense solve") {
  for (int N : {2, 3}) {
    for (double phi2 : {0.0, std::numbers::pi}) {
      auto p = (N == 2 ? SystemParams::two_cavity() : SystemParams::three_cavity(0.25)).with_omega_q(0.61).with_n_max(3);
      p.phases = {0.0, phi2};
      for (Basis b : {Basis::bare, Basis::supermode}) {
        const Eigen::VectorXd ref = oracle_levels(p, b);
        const auto low = lowest_levels(p, b, 10);
        for (Index i = 0; i < 10; ++i) CHECK(low.eigenvalues[i] == doctest::Approx(ref[i]).epsilon(1e-10));
        const Eigen::MatrixXcd H = build_hamiltonian(p, b).matrix();
        const Eigen::MatrixXcd r = H * low.eigenvectors - low.eigenvectors * low.eigenvalues.asDiagonal();
        CHECK(r.cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
}

TEST_CASE("full diagonalization is orthonormal and matches the spectrum") {
  const auto p = SystemParams::three_cavity().with_omega_q(0.66).with_n_max(2);
  const auto e = diagonalize(p, Basis::supermode);
  const auto& V = e.eigenvectors;
  CHECK((V.adjoint() * V - Eigen::MatrixXcd::Identity(V.cols(), V.cols())).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::VectorXd ref = oracle_levels(p, Basis::supermode);
  CHECK((e.eigenvalues - ref).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("sweep invariants") {
  const auto p = SystemParams::two_cavity().with_n_max(4);
  const std::vector<double> grid{0.5, 0.55, 0.6, 0.65};
  const auto r = sweep_levels(p, grid, 6, {Basis::supermode, true});
  REQUIRE(r.relative_levels.rows() == 4);
  for (Index i = 0; i < 4; ++i) {
    CHECK(r.relative_levels(i, 0) == 0.0);
    for (Index k = 1; k < 6; ++k) CHECK(r.relative_levels(i, k) >= r.relative_levels(i, k - 1));
  }
  CHECK(r.dominant_labels.size() == 4);
  CHECK(r.dominant_labels[0][0].label == "0,0,g,g");
  CHECK_THROWS_AS(sweep_levels(p, std::vector<double>{0.6, 0.5}, 4), ConfigError);
  CHECK_THROWS_AS(sweep_levels(p, grid, 1), ConfigError);
}

TEST_CASE("gap search agrees with a brute-force scan of the oracle Hamiltonian") {
  const auto p = SystemParams::two_cavity().with_n_max(6);
  const auto ac = find_min_gap(p, {3, 4}, 0.60, 0.66, {Basis::bare});
  CHECK(ac.omega_eff == ac.gap_min / 2.0);
  CHECK(ac.n_max == 6);
  // Independent route: dense Eigen solves of the Kronecker-built Hamiltonian on a fine grid
  // around the reported minimum, then a parabola through the three lowest samples.
  double best = 1e9, best_x = 0.0;
  std::vector<double> xs, gs;
  for (int k = -20; k <= 20; ++k) {
    const double wq = ac.omega_q_star + k * 2e-5;
    const Eigen::VectorXd lv = oracle_levels(p.with_omega_q(wq), Basis::bare);
    xs.push_back(wq);
    gs.push_back(lv[4] - lv[3]);
    if (gs.back() < best) best = gs.back(), best_x = wq;
  }
  CHECK(std::abs(best_x - ac.omega_q_star) < 5e-5);
  CHECK(ac.gap_min <= best + 1e-10);
  CHECK(ac.gap_min == doctest::Approx(best).epsilon(1e-4));
  // frozen from the scan above
  CHECK(ac.gap_min == doctest::Approx(0.016751).epsilon(1e-3));
  CHECK(classify_crossing(ac) == CrossingKind::avoided);
}

TEST_CASE("gap search rejects brackets without exactly one minimum") {
  const auto p = SystemParams::two_cavity().with_n_max(4);
  CHECK_THROWS_AS(find_min_gap(p, {3, 4}, 0.30, 0.35, {Basis::supermode, 21, 1e-6}), BracketError);
  CHECK_THROWS_AS(find_min_gap(p, {4, 3}, 0.6, 0.66), ConfigError);
  CHECK_THROWS_AS(find_min_gap(p, {3, 4}, 0.66, 0.6), ConfigError);
}

TEST_CASE("identify_state ranks candidates") {
  const auto p = SystemParams::two_cavity().with_n_max(3);
  std::vector<LabeledState> cands{{"1_1", resolve_state_label(p, Basis::bare, "1_1")},
                                  {"1_A", resolve_state_label(p, Basis::bare, "1_A")},
                                  {"vac", resolve_state_label(p, Basis::bare, "vac")}};
  const auto ranked = identify_state(resolve_state_label(p, Basis::bare, "1_A"), cands);
  CHECK(ranked[0].label == "1_A");
  CHECK(ranked[0].weight == doctest::Approx(1.0));
  CHECK(ranked[1].weight == doctest::Approx(0.5));
  CHECK(ranked[2].weight == doctest::Approx(0.0));
  const auto other = resolve_state_label(SystemParams::three_cavity().with_n_max(3), Basis::bare, "vac");
  CHECK_THROWS_AS(identify_state(other, cands), ModeTypeError);
}

TEST_CASE("dressed frame at the two-cavity anticrossing") {
  const auto p = SystemParams::two_cavity().with_omega_q(0.6293008);
  const auto eig = diagonalize(p, Basis::supermode);
  const auto f = dressed_frame(p, Basis::supermode, eig);
  REQUIRE(f.labels.size() == 6);
  const Index m = f.dressed.cols();
  CHECK((f.dressed.adjoint() * f.dressed - Eigen::MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-10);
  // every dressed column lies in the span of the selected eigenstates
  Eigen::MatrixXcd Vs(eig.eigenvectors.rows(), static_cast<Index>(f.levels.size()));
  for (std::size_t k = 0; k < f.levels.size(); ++k) Vs.col(static_cast<Index>(k)) = eig.eigenvectors.col(f.levels[k]);
  CHECK((Vs * (Vs.adjoint() * f.dressed) - f.dressed).cwiseAbs().maxCoeff() < 1e-10);

  auto weight = [&](const QuantumState& s, Index level) { return std::norm(eig.eigenvectors.col(level).dot(s.amplitudes())); };
  const auto vac = f.dress(resolve_state_label(p, Basis::supermode, "vac"));
  CHECK(weight(vac, 0) > 0.999);
  const auto one_a = f.dress(resolve_state_label(p, Basis::supermode, "1_A"));
  const auto ee = f.dress(resolve_state_label(p, Basis::supermode, "ee"));
  CHECK(weight(one_a, 3) + weight(one_a, 4) > 0.99);
  CHECK(weight(one_a, 3) == doctest::Approx(0.5).epsilon(0.1));
  CHECK(weight(ee, 3) + weight(ee, 4) > 0.99);
  CHECK(std::abs(overlap(one_a, ee)) < 1e-10);
  CHECK_THROWS_AS(f.dress(resolve_state_label(p, Basis::supermode, "supermode:2,0,g,g")), ConfigError);
  CHECK_THROWS_AS(dressed_frame(p, Basis::supermode, lowest_levels(p, Basis::supermode, 4)), ContractViolation);
}

TEST_CASE("truncation convergence") {
  const auto p = SystemParams::two_cavity().with_omega_q(0.6);
  const std::vector<int> ladder{3, 4, 5, 6, 7};
  const auto rep = convergence_report(p, ladder, 5);
  REQUIRE(rep.drift.rows() == 4);
  CHECK(rep.drift.row(3).maxCoeff() < rep.drift.row(0).maxCoeff());
  const int n = resolve_n_max(p, Basis::supermode, 5, 1e-6);
  const auto a = lowest_levels(p.with_n_max(n), Basis::supermode, 5, false).eigenvalues;
  const auto b = lowest_levels(p.with_n_max(n + 1), Basis::supermode, 5, false).eigenvalues;
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);
  CHECK_THROWS_AS(resolve_n_max(p, Basis::supermode, 5, 1e-14, 2, 400), ConvergenceError);
  auto q = p;
  q.auto_n_max = true;
  CHECK(resolve_truncation(q, Basis::supermode, 5).auto_n_max == false);
}
