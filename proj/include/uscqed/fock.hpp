#pragma once
// Truncated Fock-space kernel: tensor-product spaces built from cavity ladders
// and qubits, dense operators on them, pure states and Hermitian
// eigendecomposition.
//
// Tensor ordering: mode 0 is the leftmost (slowest-varying) factor. Qubit basis
// order is (g, e) and sigma_z |e> = +|e>.

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uscqed/errors.hpp"

namespace uscqed {

using Complex = std::complex<double>;
using Index = Eigen::Index;

inline constexpr Index kDefaultDimensionGuard = 20000;

enum class ModeKind { cavity, qubit };

struct ModeSpec {
  ModeKind kind = ModeKind::cavity;
  int dim = 2;
  std::string label;

  static ModeSpec cavity(int n_max, std::string label);
  static ModeSpec qubit(std::string label);

  bool operator==(const ModeSpec&) const = default;
};

class HilbertSpace {
 public:
  explicit HilbertSpace(std::vector<ModeSpec> modes);

  const std::vector<ModeSpec>& modes() const { return modes_; }
  const ModeSpec& mode(std::size_t i) const { return modes_.at(i); }
  std::size_t num_modes() const { return modes_.size(); }
  Index total_dim() const { return total_dim_; }

  /// Distance in the flat index between consecutive levels of mode i.
  Index stride(std::size_t i) const { return strides_.at(i); }

  std::vector<int> occupations(Index flat) const;
  Index flat_index(std::span<const int> occupations) const;

  /// Index of the mode with this label; throws std::out_of_range.
  std::size_t find_mode(const std::string& label) const;
  std::vector<std::size_t> qubit_modes() const;

  /// "1,0,g,g" style label, leftmost mode first.
  std::string format_state(Index flat) const;

  bool operator==(const HilbertSpace& other) const { return modes_ == other.modes_; }

 private:
  std::vector<ModeSpec> modes_;
  std::vector<Index> strides_;
  Index total_dim_ = 1;
};

using SpacePtr = std::shared_ptr<const HilbertSpace>;

/// Builds a space; throws ConfigError on an empty list, invalid modes or when
/// the total dimension exceeds `guard`.
SpacePtr make_space(std::vector<ModeSpec> modes, Index guard = kDefaultDimensionGuard);

bool same_space(const SpacePtr& a, const SpacePtr& b);

class Operator {
 public:
  /// With `hermitian` set the matrix is checked: max|M - M^dag| <= 1e-12 max|M|.
  Operator(SpacePtr space, Eigen::MatrixXcd matrix, bool hermitian);

  const SpacePtr& space() const { return space_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  bool hermitian() const { return hermitian_; }
  Index dim() const { return matrix_.rows(); }

  /// max|M - M^dag| / max|M| (0 for the zero matrix).
  double hermiticity_defect() const;
  bool is_real() const;

  Operator adjoint() const;

  friend Operator operator+(const Operator& a, const Operator& b);
  friend Operator operator-(const Operator& a, const Operator& b);
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(Complex s, const Operator& a);
  friend Operator operator*(double s, const Operator& a);

 private:
  SpacePtr space_;
  Eigen::MatrixXcd matrix_;
  bool hermitian_ = false;
};

Operator commutator(const Operator& a, const Operator& b);

class QuantumState {
 public:
  QuantumState(SpacePtr space, Eigen::VectorXcd amplitudes);

  static QuantumState basis(SpacePtr space, Index flat);

  const SpacePtr& space() const { return space_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Index dim() const { return amplitudes_.size(); }
  double norm() const { return amplitudes_.norm(); }
  QuantumState normalized() const;

 private:
  SpacePtr space_;
  Eigen::VectorXcd amplitudes_;
};

struct EigenDecomposition {
  SpacePtr space;
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXcd eigenvectors; // column i pairs with eigenvalues[i]

  Index size() const { return eigenvalues.size(); }
  QuantumState state(Index i) const;
};

// ---- single-mode matrices -------------------------------------------------

enum class PauliAxis { x, y, z, plus, minus };

/// Truncated annihilation operator, <n-1|a|n> = sqrt(n).
Eigen::MatrixXcd ladder_matrix(int dim);
/// 2x2 Pauli matrix in the (g, e) basis.
Eigen::MatrixXcd pauli_matrix(PauliAxis axis);

/// One factor of a product operator: `op` acts on mode `mode`.
struct LocalFactor {
  std::size_t mode;
  const Eigen::MatrixXcd* op;
};

/// Accumulates sums of products of single-mode operators directly into a dense
/// matrix, without forming full-size intermediate products.
class OperatorAssembler {
 public:
  explicit OperatorAssembler(SpacePtr space);

  /// Adds coeff * (prod of factors), identity on the other modes.
  void add(Complex coeff, std::initializer_list<LocalFactor> factors);
  void add(Complex coeff, std::span<const LocalFactor> factors);
  /// Adds coeff on the diagonal entry of each basis state, coeff(flat) style.
  void add_diagonal(const Eigen::VectorXd& diagonal);

  Operator finish(bool hermitian) &&;

 private:
  SpacePtr space_;
  Eigen::MatrixXcd matrix_;
};

// ---- embedded operators ---------------------------------------------------

Operator identity(SpacePtr space);
/// Throws ModeTypeError if the mode is a qubit, std::out_of_range for a bad index.
Operator annihilation(SpacePtr space, std::size_t mode_index);
Operator creation(SpacePtr space, std::size_t mode_index);
Operator number(SpacePtr space, std::size_t mode_index);
/// Throws ModeTypeError if the mode is not a qubit.
Operator pauli(SpacePtr space, std::size_t qubit_mode, PauliAxis axis);
Operator projector(const QuantumState& state);

// ---- state algebra --------------------------------------------------------

/// <state|op|state>; throws ModeTypeError on a space mismatch.
Complex expectation(const QuantumState& state, const Operator& op);
/// <a|b> with a conjugated.
Complex overlap(const QuantumState& a, const QuantumState& b);
QuantumState apply(const Operator& op, const QuantumState& state);

// ---- eigensolvers ---------------------------------------------------------

/// Full decomposition of a Hermitian operator. Eigenvalues ascending; each
/// eigenvector's largest-magnitude amplitude (lowest index on ties) is real
/// positive; exactly degenerate vectors are ordered by that index.
/// Throws ContractViolation if the hermitian flag is not set.
EigenDecomposition eig_hermitian(const Operator& op);

/// The `count` lowest eigenpairs (or eigenvalues only) of a Hermitian operator.
EigenDecomposition eig_hermitian_lowest(const Operator& op, Index count, bool vectors = true);

/// Dense symmetric / Hermitian eigensolvers on raw matrices. `count` < 0 means
/// all eigenpairs. Results carry the same phase and ordering conventions.
void eigh(const Eigen::MatrixXd& matrix, Index count, bool vectors, Eigen::VectorXd& values,
          Eigen::MatrixXd& eigenvectors);
void eigh(const Eigen::MatrixXcd& matrix, Index count, bool vectors, Eigen::VectorXd& values,
          Eigen::MatrixXcd& eigenvectors);

/// Applies the phase and degenerate-ordering conventions in place.
void canonicalize_eigenvectors(Eigen::VectorXd& values, Eigen::MatrixXcd& vectors);

}  // namespace uscqed
