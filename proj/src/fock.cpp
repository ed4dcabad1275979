#include "uscqed/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lapack.hpp"

namespace uscqed {

ModeSpec ModeSpec::cavity(int n_max, std::string label) {
  return ModeSpec{ModeKind::cavity, n_max + 1, std::move(label)};
}

ModeSpec ModeSpec::qubit(std::string label) { return ModeSpec{ModeKind::qubit, 2, std::move(label)}; }

HilbertSpace::HilbertSpace(std::vector<ModeSpec> modes) : modes_(std::move(modes)) {
  strides_.assign(modes_.size(), 1);
  for (std::size_t i = modes_.size(); i-- > 0;) {
    strides_[i] = total_dim_;
    total_dim_ *= modes_[i].dim;
  }
}

std::vector<int> HilbertSpace::occupations(Index flat) const {
  std::vector<int> occ(modes_.size());
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    occ[i] = static_cast<int>((flat / strides_[i]) % modes_[i].dim);
  }
  return occ;
}

Index HilbertSpace::flat_index(std::span<const int> occ) const {
  if (occ.size() != modes_.size()) {
    throw std::out_of_range("occupation list has " + std::to_string(occ.size()) + " entries, space has " +
                            std::to_string(modes_.size()) + " modes");
  }
  Index flat = 0;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (occ[i] < 0 || occ[i] >= modes_[i].dim) {
      throw std::out_of_range("occupation " + std::to_string(occ[i]) + " of mode '" + modes_[i].label +
                              "' outside [0, " + std::to_string(modes_[i].dim - 1) + "]");
    }
    flat += occ[i] * strides_[i];
  }
  return flat;
}

std::size_t HilbertSpace::find_mode(const std::string& label) const {
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (modes_[i].label == label) return i;
  }
  throw std::out_of_range("no mode labelled '" + label + "'");
}

std::vector<std::size_t> HilbertSpace::qubit_modes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (modes_[i].kind == ModeKind::qubit) out.push_back(i);
  }
  return out;
}

std::string HilbertSpace::format_state(Index flat) const {
  const auto occ = occupations(flat);
  std::ostringstream os;
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (i) os << ',';
    if (modes_[i].kind == ModeKind::qubit) {
      os << (occ[i] ? 'e' : 'g');
    } else {
      os << occ[i];
    }
  }
  return os.str();
}

SpacePtr make_space(std::vector<ModeSpec> modes, Index guard) {
  if (modes.empty()) throw ConfigError("a Hilbert space needs at least one mode");
  Index total = 1;
  for (const auto& m : modes) {
    if (m.dim < 2) throw ConfigError("mode '" + m.label + "' has dimension " + std::to_string(m.dim) + " < 2");
    if (m.kind == ModeKind::qubit && m.dim != 2) throw ConfigError("qubit mode '" + m.label + "' must have dim 2");
    total *= m.dim;
    if (total > guard) {
      throw ConfigError("Hilbert space dimension exceeds the guard of " + std::to_string(guard));
    }
  }
  return std::make_shared<const HilbertSpace>(std::move(modes));
}

bool same_space(const SpacePtr& a, const SpacePtr& b) { return a == b || (a && b && *a == *b); }

namespace {

void require_same(const SpacePtr& a, const SpacePtr& b, const char* what) {
  if (!same_space(a, b)) throw ModeTypeError(std::string(what) + ": operands live on different spaces");
}

}  // namespace

// ---- Operator ---------------------------------------------------------------

Operator::Operator(SpacePtr space, Eigen::MatrixXcd matrix, bool hermitian)
    : space_(std::move(space)), matrix_(std::move(matrix)), hermitian_(hermitian) {
  if (!space_) throw ContractViolation("operator without a space");
  if (matrix_.rows() != space_->total_dim() || matrix_.cols() != space_->total_dim()) {
    throw ContractViolation("operator matrix does not match the space dimension");
  }
  if (hermitian_ && hermiticity_defect() > 1e-12) {
    throw ContractViolation("matrix flagged Hermitian fails max|M - M^dag| <= 1e-12 max|M|");
  }
}

double Operator::hermiticity_defect() const {
  const double scale = matrix_.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() / scale;
}

bool Operator::is_real() const { return matrix_.imag().cwiseAbs().maxCoeff() == 0.0; }

Operator Operator::adjoint() const { return Operator(space_, matrix_.adjoint(), hermitian_); }

Operator operator+(const Operator& a, const Operator& b) {
  require_same(a.space_, b.space_, "operator +");
  return Operator(a.space_, a.matrix_ + b.matrix_, a.hermitian_ && b.hermitian_);
}

Operator operator-(const Operator& a, const Operator& b) {
  require_same(a.space_, b.space_, "operator -");
  return Operator(a.space_, a.matrix_ - b.matrix_, a.hermitian_ && b.hermitian_);
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same(a.space_, b.space_, "operator *");
  return Operator(a.space_, a.matrix_ * b.matrix_, false);
}

Operator operator*(Complex s, const Operator& a) {
  return Operator(a.space_, s * a.matrix_, a.hermitian_ && s.imag() == 0.0);
}

Operator operator*(double s, const Operator& a) { return Operator(a.space_, s * a.matrix_, a.hermitian_); }

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

// ---- QuantumState -----------------------------------------------------------

QuantumState::QuantumState(SpacePtr space, Eigen::VectorXcd amplitudes)
    : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
  if (!space_ || amplitudes_.size() != space_->total_dim()) {
    throw ContractViolation("state vector does not match the space dimension");
  }
}

QuantumState QuantumState::basis(SpacePtr space, Index flat) {
  const Index n = space->total_dim();
  if (flat < 0 || flat >= n) throw std::out_of_range("basis index outside the space");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
  v[flat] = 1.0;
  return QuantumState(std::move(space), std::move(v));
}

QuantumState QuantumState::normalized() const {
  const double n = norm();
  if (n == 0.0) throw ContractViolation("cannot normalise the zero vector");
  return QuantumState(space_, amplitudes_ / n);
}

QuantumState EigenDecomposition::state(Index i) const { return QuantumState(space, eigenvectors.col(i)); }

// ---- single-mode matrices ---------------------------------------------------

Eigen::MatrixXcd ladder_matrix(int dim) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Eigen::MatrixXcd pauli_matrix(PauliAxis axis) {
  // rows/cols: 0 = g, 1 = e
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  const Complex i(0.0, 1.0);
  switch (axis) {
    case PauliAxis::x:
      m(0, 1) = m(1, 0) = 1.0;
      break;
    case PauliAxis::y:  // -i (sigma_+ - sigma_-)
      m(1, 0) = -i;
      m(0, 1) = i;
      break;
    case PauliAxis::z:
      m(0, 0) = -1.0;
      m(1, 1) = 1.0;
      break;
    case PauliAxis::plus:
      m(1, 0) = 1.0;
      break;
    case PauliAxis::minus:
      m(0, 1) = 1.0;
      break;
  }
  return m;
}

// ---- OperatorAssembler ------------------------------------------------------

OperatorAssembler::OperatorAssembler(SpacePtr space)
    : space_(std::move(space)), matrix_(Eigen::MatrixXcd::Zero(space_->total_dim(), space_->total_dim())) {}

void OperatorAssembler::add(Complex coeff, std::initializer_list<LocalFactor> factors) {
  add(coeff, std::span<const LocalFactor>(factors.begin(), factors.size()));
}

void OperatorAssembler::add(Complex coeff, std::span<const LocalFactor> factors) {
  const auto& space = *space_;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const auto& f = factors[k];
    if (f.mode >= space.num_modes()) throw std::out_of_range("factor mode index out of range");
    if (f.op->rows() != space.mode(f.mode).dim || f.op->cols() != space.mode(f.mode).dim) {
      throw ContractViolation("factor dimension does not match mode '" + space.mode(f.mode).label + "'");
    }
    for (std::size_t l = 0; l < k; ++l) {
      if (factors[l].mode == f.mode) throw ContractViolation("two factors act on the same mode");
    }
  }

  const Index n = space.total_dim();
  // Column by column: expand |col> through each factor's nonzero entries.
  std::vector<std::pair<Index, Complex>> front, next;
  for (Index col = 0; col < n; ++col) {
    front.assign(1, {col, coeff});
    for (const auto& f : factors) {
      const Index stride = space.stride(f.mode);
      const int dim = space.mode(f.mode).dim;
      next.clear();
      for (const auto& [flat, amp] : front) {
        const int level = static_cast<int>((flat / stride) % dim);
        const Index base = flat - level * stride;
        for (int row = 0; row < dim; ++row) {
          const Complex m = (*f.op)(row, level);
          if (m != 0.0) next.emplace_back(base + row * stride, amp * m);
        }
      }
      front.swap(next);
      if (front.empty()) break;
    }
    for (const auto& [row, amp] : front) matrix_(row, col) += amp;
  }
}

void OperatorAssembler::add_diagonal(const Eigen::VectorXd& diagonal) {
  if (diagonal.size() != matrix_.rows()) throw ContractViolation("diagonal length mismatch");
  matrix_.diagonal() += diagonal.cast<Complex>();
}

Operator OperatorAssembler::finish(bool hermitian) && {
  return Operator(std::move(space_), std::move(matrix_), hermitian);
}

// ---- embedded operators -----------------------------------------------------

namespace {

const ModeSpec& checked_mode(const SpacePtr& space, std::size_t index) {
  if (index >= space->num_modes()) {
    throw std::out_of_range("mode index " + std::to_string(index) + " out of range");
  }
  return space->mode(index);
}

const ModeSpec& cavity_mode(const SpacePtr& space, std::size_t index) {
  const auto& m = checked_mode(space, index);
  if (m.kind != ModeKind::cavity) throw ModeTypeError("mode '" + m.label + "' is a qubit, not a cavity");
  return m;
}

const ModeSpec& qubit_mode(const SpacePtr& space, std::size_t index) {
  const auto& m = checked_mode(space, index);
  if (m.kind != ModeKind::qubit) throw ModeTypeError("mode '" + m.label + "' is a cavity, not a qubit");
  return m;
}

Operator single(const SpacePtr& space, std::size_t mode, const Eigen::MatrixXcd& local, bool hermitian) {
  OperatorAssembler acc(space);
  acc.add(1.0, {{mode, &local}});
  return std::move(acc).finish(hermitian);
}

}  // namespace

Operator identity(SpacePtr space) {
  const Index n = space->total_dim();
  return Operator(std::move(space), Eigen::MatrixXcd::Identity(n, n), true);
}

Operator annihilation(SpacePtr space, std::size_t mode_index) {
  const auto& m = cavity_mode(space, mode_index);
  return single(space, mode_index, ladder_matrix(m.dim), false);
}

Operator creation(SpacePtr space, std::size_t mode_index) {
  const auto& m = cavity_mode(space, mode_index);
  return single(space, mode_index, ladder_matrix(m.dim).adjoint(), false);
}

Operator number(SpacePtr space, std::size_t mode_index) {
  const auto& m = cavity_mode(space, mode_index);
  const Eigen::MatrixXcd a = ladder_matrix(m.dim);
  return single(space, mode_index, a.adjoint() * a, true);
}

Operator pauli(SpacePtr space, std::size_t qubit_index, PauliAxis axis) {
  qubit_mode(space, qubit_index);
  const bool herm = axis == PauliAxis::x || axis == PauliAxis::y || axis == PauliAxis::z;
  return single(space, qubit_index, pauli_matrix(axis), herm);
}

Operator projector(const QuantumState& state) {
  const auto& v = state.amplitudes();
  return Operator(state.space(), v * v.adjoint(), true);
}

// ---- state algebra ----------------------------------------------------------

Complex expectation(const QuantumState& state, const Operator& op) {
  require_same(state.space(), op.space(), "expectation");
  return state.amplitudes().dot(op.matrix() * state.amplitudes());
}

Complex overlap(const QuantumState& a, const QuantumState& b) {
  require_same(a.space(), b.space(), "overlap");
  return a.amplitudes().dot(b.amplitudes());  // Eigen's dot conjugates the left operand
}

QuantumState apply(const Operator& op, const QuantumState& state) {
  require_same(state.space(), op.space(), "apply");
  return QuantumState(state.space(), op.matrix() * state.amplitudes());
}

// ---- eigensolvers -----------------------------------------------------------

namespace {

template <typename Matrix>
void canonicalize(Eigen::VectorXd& values, Matrix& vectors) {
  const Index n = values.size();
  if (n == 0 || vectors.cols() == 0) return;
  std::vector<Index> lead(n);
  for (Index j = 0; j < n; ++j) {
    auto col = vectors.col(j);
    const double peak = col.cwiseAbs().maxCoeff();
    Index k = 0;
    while (std::abs(col[k]) < peak * (1.0 - 1e-12)) ++k;
    lead[j] = k;
    using Scalar = typename Matrix::Scalar;
    const Scalar phase = col[k] / std::abs(col[k]);
    col /= phase;
    col[k] = std::abs(col[k]);
  }
  // Exactly degenerate runs (to solver precision) are ordered by leading index.
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  Index start = 0;
  while (start < n) {
    Index stop = start + 1;
    while (stop < n && values[stop] - values[stop - 1] <= 1e-12 * scale) ++stop;
    if (stop - start > 1) {
      std::stable_sort(order.begin() + start, order.begin() + stop,
                       [&](Index a, Index b) { return lead[a] < lead[b]; });
    }
    start = stop;
  }
  Eigen::VectorXd v2(n);
  Matrix m2(vectors.rows(), n);
  for (Index j = 0; j < n; ++j) {
    v2[j] = values[order[j]];
    m2.col(j) = vectors.col(order[j]);
  }
  values = std::move(v2);
  vectors = std::move(m2);
}

}  // namespace

void canonicalize_eigenvectors(Eigen::VectorXd& values, Eigen::MatrixXcd& vectors) { canonicalize(values, vectors); }

void eigh(const Eigen::MatrixXd& matrix, Index count, bool vectors, Eigen::VectorXd& values,
          Eigen::MatrixXd& eigenvectors) {
  detail::symmetric_eigen(matrix, count, vectors, values, eigenvectors);
  if (vectors) canonicalize(values, eigenvectors);
}

void eigh(const Eigen::MatrixXcd& matrix, Index count, bool vectors, Eigen::VectorXd& values,
          Eigen::MatrixXcd& eigenvectors) {
  detail::hermitian_eigen(matrix, count, vectors, values, eigenvectors);
  if (vectors) canonicalize(values, eigenvectors);
}

namespace {

EigenDecomposition decompose(const Operator& op, Index count, bool vectors) {
  if (!op.hermitian()) throw ContractViolation("eig_hermitian requires an operator flagged Hermitian");
  EigenDecomposition out;
  out.space = op.space();
  if (op.is_real()) {
    Eigen::MatrixXd vecs;
    eigh(Eigen::MatrixXd(op.matrix().real()), count, vectors, out.eigenvalues, vecs);
    out.eigenvectors = vecs.cast<Complex>();
  } else {
    eigh(op.matrix(), count, vectors, out.eigenvalues, out.eigenvectors);
  }
  return out;
}

}  // namespace

EigenDecomposition eig_hermitian(const Operator& op) { return decompose(op, -1, true); }

EigenDecomposition eig_hermitian_lowest(const Operator& op, Index count, bool vectors) {
  if (count <= 0) throw ContractViolation("eig_hermitian_lowest needs a positive count");
  return decompose(op, std::min(count, op.dim()), vectors);
}

}  // namespace uscqed
