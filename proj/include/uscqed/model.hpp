#pragma once
// Hamiltonians of two- and three-cavity arrays with one ultrastrongly coupled
// qubit per end cavity, their normal-mode (supermode) forms, the Gaussian drive
// and labelled state preparation.
//
// Units: the reference cavity frequency is 1, every rate is in units of it and
// time is in units of its inverse.

#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uscqed/fock.hpp"

namespace uscqed {

enum class Basis { bare, supermode };

std::string to_string(Basis basis);
Basis parse_basis(std::string_view text);

struct SystemParams {
  int n_cavities = 2;
  std::vector<double> omega_c{1.0, 1.0};  // per cavity, before the central detuning
  double delta = 0.0;                     // three-cavity central detuning
  std::vector<double> omega_q{0.5, 0.5};  // per qubit
  double J = 0.05;
  double g_abs = 0.3;
  std::vector<double> phases{0.0, std::numbers::pi};  // per qubit, each 0 or pi
  double theta = std::numbers::pi / 6.0;
  int n_max = 6;
  bool auto_n_max = false;  // raise n_max until tracked levels settle

  /// J = 0.05, |g| = 0.3, theta = pi/6, phases (0, pi), n_max = 6.
  static SystemParams two_cavity();
  static SystemParams three_cavity(double delta = 0.0);

  SystemParams with_omega_q(double omega) const;
  SystemParams with_n_max(int n) const;

  /// Every violation, as "system.<field>: message".
  std::vector<std::string> validation_errors() const;
  /// Throws UnsupportedParameter for a bad phase, ConfigError otherwise.
  void validate() const;

  /// Bare frequency of cavity n (0-based), central detuning included.
  double cavity_frequency(int n) const;
  /// Cavity (0-based) that qubit q couples to: q for N = 2, {0, 2} for N = 3.
  int coupled_cavity(int qubit) const;
  /// e^{i phi} of qubit q, +1 or -1.
  int phase_sign(int qubit) const;
};

struct SupermodeTransform {
  /// Rows: normal modes, (S, A) for N = 2 and (S1, A, S2) for N = 3.
  /// a_row = sum_n matrix(row, n) a_n.
  Eigen::MatrixXd matrix;
  Eigen::VectorXd mode_frequencies;
  std::vector<std::string> labels;

  Index row_of(const std::string& label) const;
};

SupermodeTransform supermode_transform(const SystemParams& p);

// ---- spaces and Hamiltonians ------------------------------------------------

/// Cavities "1".."N" then qubits "q1", "q2".
SpacePtr bare_space(const SystemParams& p);
/// Normal modes in label order ("A","S") or ("S1","S2","A"), then "q1", "q2".
SpacePtr supermode_space(const SystemParams& p);
SpacePtr space_for(const SystemParams& p, Basis basis);

Operator build_bare_hamiltonian(const SystemParams& p);
Operator build_supermode_hamiltonian(const SystemParams& p);
Operator build_hamiltonian(const SystemParams& p, Basis basis);

/// Quadrature a_1 + a_1^dag of the first bare cavity, written in `basis`.
Operator drive_quadrature(const SystemParams& p, Basis basis);

// ---- drive ------------------------------------------------------------------

/// Denominator of the Gaussian envelope: tau*sqrt(2)*pi (literal) or tau*sqrt(2 pi).
enum class EnvelopeNorm { literal, sqrt_two_pi };

/// Carrier placed midway between level groups, e.g. "mid:3,4" -> (w30 + w40)/2
/// and "mid:(3+4),5" -> ((w30 + w40)/2 + w50)/2.
struct CarrierMidpoint {
  std::vector<std::vector<int>> groups;

  static CarrierMidpoint parse(std::string_view text);
  std::string to_string() const;
  int highest_level() const;
  /// `relative_levels` holds w_i0 = w_i - w_0.
  double resolve(const Eigen::VectorXd& relative_levels) const;
};

struct PulseSpec {
  double amplitude = 0.0;
  std::variant<double, CarrierMidpoint> omega_d = 1.0;
  double t0 = 0.0;
  double tau = 1.0;
  EnvelopeNorm norm = EnvelopeNorm::literal;
  double area_scale = 1.0;  // calibration gain on the envelope

  void validate() const;
  bool carrier_resolved() const { return std::holds_alternative<double>(omega_d); }
  /// Throws ContractViolation while the carrier is still a midpoint directive.
  double carrier() const;
  double denominator() const;
  /// Integral of the envelope over all time.
  double area() const;
};

/// area_scale * A exp[-(t - t0)^2 / (2 tau^2)] / denominator.
double pulse_envelope(const PulseSpec& pulse, double t);
Operator drive_hamiltonian(const SystemParams& p, const PulseSpec& pulse, double t, Basis basis = Basis::bare);

// ---- labelled states --------------------------------------------------------

/// Computational basis vector; occupations leftmost mode first, qubits 0 = g, 1 = e.
QuantumState bare_label_state(const SpacePtr& space, std::span<const int> occupations);
/// Normal-mode Fock state (occupations in supermode-space order) expressed in the bare basis.
QuantumState supermode_label_state(const SystemParams& p, std::span<const int> occupations);
/// Fock state labelled in `label_basis` expressed on the `target` space.
QuantumState prepare_state(const SystemParams& p, Basis target, Basis label_basis, std::span<const int> occupations);

/// Named states: "vac" (all ground), "ee", "1_<mode>" for a single photon in a
/// bare cavity ("1_1") or normal mode ("1_A", "1_S2"), and explicit
/// "bare:1,0,g,g" / "supermode:0,1,g,g" occupation lists.
QuantumState resolve_state_label(const SystemParams& p, Basis target, std::string_view label);
/// Occupation list parsed from "1,0,g,e".
std::vector<int> parse_occupations(std::string_view text);

// ---- symmetry ---------------------------------------------------------------

/// Mirror of the array (cavity n <-> N+1-n, qubit 1 <-> 2), times photon parity
/// when the two couplings have opposite sign. P|b> = sign[b] |image[b]>.
struct Reflection {
  std::vector<Index> image;
  std::vector<signed char> sign;
};

/// Present when the parameters are mirror symmetric (equal qubits, mirror
/// symmetric cavity frequencies).
std::optional<Reflection> reflection_symmetry(const SystemParams& p, Basis basis);

}  // namespace uscqed
