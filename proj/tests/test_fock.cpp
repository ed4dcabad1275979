#include <doctest.h>

#include <random>

#include "uscqed/fock.hpp"

using namespace uscqed;

namespace {

SpacePtr small_space() {
  return make_space({ModeSpec::cavity(3, "1"), ModeSpec::cavity(2, "2"), ModeSpec::qubit("q1")});
}

Eigen::MatrixXcd random_hermitian(int n, std::mt19937& rng) {
  std::normal_distribution<double> d;
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = Complex(d(rng), d(rng));
  }
  return (m + m.adjoint()) / 2.0;
}

}  // namespace

TEST_CASE("ladder commutator in a truncated space") {
  const Eigen::MatrixXcd a = ladder_matrix(5);
  const Eigen::MatrixXcd c = a * a.adjoint() - a.adjoint() * a;
  Eigen::VectorXcd expected(5);
  expected << 1, 1, 1, 1, -4;
  CHECK((c - Eigen::MatrixXcd(expected.asDiagonal())).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Pauli algebra") {
  const auto x = pauli_matrix(PauliAxis::x);
  const auto y = pauli_matrix(PauliAxis::y);
  const auto z = pauli_matrix(PauliAxis::z);
  CHECK(((z * x - x * z) - Complex(0, 2) * y).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((pauli_matrix(PauliAxis::plus) - (x + Complex(0, 1) * y) / 2.0).cwiseAbs().maxCoeff() < 1e-15);
  // sigma_z |e> = +|e> with basis (g, e)
  CHECK(z(1, 1).real() == doctest::Approx(1.0));
}

TEST_CASE("flat index and occupations are inverse") {
  const auto s = small_space();
  CHECK(s->total_dim() == 4 * 3 * 2);
  for (Index b = 0; b < s->total_dim(); ++b) CHECK(s->flat_index(s->occupations(b)) == b);
  CHECK(s->stride(0) == 6);
  CHECK(s->format_state(s->flat_index(std::vector<int>{1, 0, 1})) == "1,0,e");
  CHECK_THROWS_AS(s->flat_index(std::vector<int>{4, 0, 0}), std::out_of_range);
  CHECK_THROWS_AS(s->find_mode("zz"), std::out_of_range);
}

TEST_CASE("space construction guards") {
  CHECK_THROWS_AS(make_space({}), ConfigError);
  CHECK_THROWS_AS(make_space({ModeSpec::cavity(200, "1"), ModeSpec::cavity(200, "2")}), ConfigError);
  CHECK_NOTHROW(make_space({ModeSpec::cavity(200, "1"), ModeSpec::cavity(200, "2")}, 50000));
}

TEST_CASE("embedded operators respect mode kinds") {
  const auto s = small_space();
  CHECK_THROWS_AS(annihilation(s, 2), ModeTypeError);
  CHECK_THROWS_AS(pauli(s, 0, PauliAxis::x), ModeTypeError);
  CHECK_THROWS_AS(annihilation(s, 7), std::out_of_range);

  const auto n1 = number(s, 0);
  for (Index b = 0; b < s->total_dim(); ++b) CHECK(n1.matrix()(b, b).real() == doctest::Approx(s->occupations(b)[0]));
  // [a, a^dag] = 1 away from the truncation edge
  const auto c = commutator(annihilation(s, 1), creation(s, 1));
  CHECK(c.matrix()(0, 0).real() == doctest::Approx(1.0));
}

TEST_CASE("Hermitian flag is enforced") {
  const auto s = make_space({ModeSpec::qubit("q")});
  Eigen::MatrixXcd m(2, 2);
  m << 0, 1, 0, 0;
  CHECK_THROWS_AS(Operator(s, m, true), ContractViolation);
  const Operator lowering(s, m, false);
  CHECK_THROWS_AS(eig_hermitian(lowering), ContractViolation);
  CHECK_THROWS_AS(Operator(s, Eigen::MatrixXcd::Zero(3, 3), false), ContractViolation);
}

TEST_CASE("space mismatch is a ModeTypeError") {
  const auto a = small_space();
  const auto b = make_space({ModeSpec::qubit("q")});
  CHECK_THROWS_AS(expectation(QuantumState::basis(b, 0), identity(a)), ModeTypeError);
  CHECK_THROWS_AS(identity(a) + identity(b), ModeTypeError);
}

TEST_CASE("eigendecomposition residual, orthonormality and ordering") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = make_space({ModeSpec::cavity(4, "1"), ModeSpec::cavity(3, "2"), ModeSpec::qubit("q")});
    const Eigen::MatrixXcd h = random_hermitian(static_cast<int>(s->total_dim()), rng);
    const auto e = eig_hermitian(Operator(s, h, true));
    const auto& V = e.eigenvectors;
    const Eigen::MatrixXcd resid = h * V - V * e.eigenvalues.asDiagonal();
    CHECK(resid.cwiseAbs().maxCoeff() < 1e-10);
    CHECK((V.adjoint() * V - Eigen::MatrixXcd::Identity(V.cols(), V.cols())).cwiseAbs().maxCoeff() < 1e-12);
    for (Index i = 1; i < e.size(); ++i) CHECK(e.eigenvalues[i] >= e.eigenvalues[i - 1]);

    const auto low = eig_hermitian_lowest(Operator(s, h, true), 5);
    REQUIRE(low.size() == 5);
    for (Index i = 0; i < 5; ++i) {
      CHECK(low.eigenvalues[i] == doctest::Approx(e.eigenvalues[i]).epsilon(1e-12));
      CHECK(std::abs(std::abs(low.eigenvectors.col(i).dot(V.col(i))) - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("state algebra") {
  const auto s = small_space();
  const auto psi = QuantumState::basis(s, 5);
  CHECK(std::abs(overlap(psi, psi) - Complex(1.0)) < 1e-15);
  CHECK_THROWS_AS(QuantumState(s, Eigen::VectorXcd::Zero(s->total_dim())).normalized(), ContractViolation);
  const auto p = projector(psi);
  CHECK(expectation(psi, p).real() == doctest::Approx(1.0));
}
