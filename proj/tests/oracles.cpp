#include "oracles.hpp"

#include <cmath>

namespace oracle {

using Eigen::MatrixXcd;
using C = std::complex<double>;

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

namespace {

MatrixXcd annihilator(int dim) {
  MatrixXcd a = MatrixXcd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

// Product over factors, identity where none is given.
MatrixXcd embed(const std::vector<MatrixXcd>& identities, const std::vector<std::pair<int, MatrixXcd>>& factors) {
  MatrixXcd out = MatrixXcd::Identity(1, 1);
  for (int m = 0; m < static_cast<int>(identities.size()); ++m) {
    MatrixXcd f = identities[static_cast<std::size_t>(m)];
    for (const auto& [mode, op] : factors) {
      if (mode == m) f = op;
    }
    out = kron(out, f);
  }
  return out;
}

}  // namespace

MatrixXcd bare_hamiltonian(const uscqed::SystemParams& p) {
  const int N = p.n_cavities;
  const int d = p.n_max + 1;
  std::vector<MatrixXcd> ids(static_cast<std::size_t>(N), MatrixXcd::Identity(d, d));
  ids.push_back(MatrixXcd::Identity(2, 2));
  ids.push_back(MatrixXcd::Identity(2, 2));

  const MatrixXcd a = annihilator(d);
  const MatrixXcd ad = a.adjoint();
  MatrixXcd sx(2, 2), sz(2, 2), ee(2, 2);
  // basis (g, e)
  sx << 0, 1, 1, 0;
  sz << -1, 0, 0, 1;
  ee << 0, 0, 0, 1;

  Eigen::Index dim = 1;
  for (const auto& id : ids) dim *= id.rows();
  MatrixXcd H = MatrixXcd::Zero(dim, dim);
  for (int n = 0; n < N; ++n) {
    const double w = p.omega_c[static_cast<std::size_t>(n)] + ((N == 3 && n == 1) ? p.delta : 0.0);
    H += w * embed(ids, {{n, ad * a}});
  }
  for (int q = 0; q < 2; ++q) H += p.omega_q[static_cast<std::size_t>(q)] * embed(ids, {{N + q, ee}});
  for (int n = 0; n + 1 < N; ++n) {
    H += p.J * embed(ids, {{n, ad}, {n + 1, a}});
    H += p.J * embed(ids, {{n, a}, {n + 1, ad}});
  }
  const MatrixXcd coupling = std::cos(p.theta) * sx + std::sin(p.theta) * sz;
  for (int q = 0; q < 2; ++q) {
    const int cavity = N == 3 ? 2 * q : q;
    const C phase = std::exp(C(0.0, p.phases[static_cast<std::size_t>(q)]));
    H += p.g_abs * phase * embed(ids, {{cavity, a + ad}, {N + q, coupling}});
  }
  return H;
}

MatrixXcd series_propagator(const MatrixXcd& H, double h) {
  const Eigen::Index n = H.rows();
  MatrixXcd out = MatrixXcd::Identity(n, n);
  MatrixXcd term = MatrixXcd::Identity(n, n);
  for (int k = 1; k < 200; ++k) {
    term = (term * H) * C(0.0, -h / k);
    out += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  return out;
}

Eigen::VectorXcd series_evolve(const MatrixXcd& H, const Eigen::VectorXcd& psi0, double t, int steps) {
  const MatrixXcd U = series_propagator(H, t / steps);
  Eigen::VectorXcd psi = psi0;
  for (int s = 0; s < steps; ++s) psi = U * psi;
  return psi;
}

Eigen::MatrixXd hopping_matrix(const uscqed::SystemParams& p) {
  const int N = p.n_cavities;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(N, N);
  for (int n = 0; n < N; ++n) h(n, n) = p.omega_c[static_cast<std::size_t>(n)] + ((N == 3 && n == 1) ? p.delta : 0.0);
  for (int n = 0; n + 1 < N; ++n) h(n, n + 1) = h(n + 1, n) = p.J;
  return h;
}

}  // namespace oracle
