#pragma once
// Time evolution: exact propagation in the eigenbasis of a static Hamiltonian
// and fixed-step integration under the Gaussian drive, with occupation
// observables sampled on an output grid.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uscqed/model.hpp"
#include "uscqed/spectrum.hpp"

namespace uscqed {

enum class ObservableKind { state_projector, qubit_joint_excited, photon_number };

std::string to_string(ObservableKind kind);
ObservableKind parse_observable_kind(std::string_view text);

/// What to record. `payload` is a state label for state_projector (see
/// resolve_state_label) and a mode label for photon_number ("1", "A", ...).
/// With `dressed` set, projectors use the DressedFrame image of the labelled
/// state and qubit_joint_excited becomes the projector on the dressed |e,e>.
/// An empty name is replaced by default_name().
struct ObservableSpec {
  ObservableKind kind = ObservableKind::qubit_joint_excited;
  std::string payload;
  std::string name;
  bool dressed = false;

  static ObservableSpec projector(std::string label, std::string name = {});
  static ObservableSpec joint_excited(std::string name = {});
  static ObservableSpec photon_number(std::string mode, std::string name = {});

  ObservableSpec as_dressed() const;

  /// "p_ee", "p_1_a", "n_1" style column names; dressed ones end in "_dressed".
  std::string default_name() const;
  std::string column_name() const { return name.empty() ? default_name() : name; }
  bool is_probability() const { return kind != ObservableKind::photon_number; }
};

/// An ObservableSpec bound to one space, ready for repeated evaluation.
class Observable {
 public:
  /// Throws ConfigError for labels or modes that do not exist for `p`, and for
  /// a dressed photon number. A dressed spec without `frame` builds its own.
  Observable(const SystemParams& p, Basis basis, const ObservableSpec& spec, const DressedFrame* frame = nullptr);

  const ObservableSpec& spec() const { return spec_; }
  const std::string& name() const { return name_; }
  const SpacePtr& space() const { return space_; }

  /// Throws ModeTypeError on a space mismatch.
  double evaluate(const QuantumState& psi) const;
  double evaluate(const Eigen::VectorXcd& amplitudes) const;

 private:
  ObservableSpec spec_;
  std::string name_;
  SpacePtr space_;
  Eigen::VectorXcd target_;    // state_projector
  Eigen::VectorXd diagonal_;   // joint excitation, or photon number of a native mode
  Eigen::MatrixXcd operator_;  // photon number of a mode from the other basis
};

std::vector<Observable> compile_observables(const SystemParams& p, Basis basis,
                                            std::span<const ObservableSpec> specs,
                                            const DressedFrame* frame = nullptr);

/// |<k|psi>|^2, the joint excitation <psi|(I x |ee><ee|)|psi> or <a^dag a>.
double occupation_probability(const SystemParams& p, const QuantumState& psi, Basis basis,
                              const ObservableSpec& spec, const DressedFrame* frame = nullptr);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::pair<std::string, std::vector<double>>> observables;  // in request order
  QuantumState final_state;
  double norm_drift = 0.0;  // max_t | ||psi(t)|| - 1 |

  // Filled by evolve_driven.
  double dt = 0.0;
  std::optional<double> carrier;
  Index retained_states = 0;

  /// Throws std::out_of_range for an unknown name.
  const std::vector<double>& series(const std::string& name) const;
};

/// psi(t) = V exp(-i Lambda t) V^dag psi0 over the full eigenbasis. Throws
/// ContractViolation for a non-Hermitian H or an unnormalised psi0 and
/// ModeTypeError on a space mismatch.
Trajectory evolve_free(const Operator& H, const QuantumState& psi0, std::span<const double> times,
                       std::span<const Observable> observables);
/// Same with a precomputed decomposition.
Trajectory evolve_free(const EigenDecomposition& eig, const QuantumState& psi0, std::span<const double> times,
                       std::span<const Observable> observables);

struct DrivenOptions {
  Basis basis = Basis::supermode;
  double dt = 0.0;             // 0: 2 pi / (200 lambda_max)
  double energy_window = 3.0;  // eigenstates retained up to this energy above the ground level
  double pulse_support = 10.0; // drive switched off beyond this many tau from t0
};

/// Integrates the driven equation of motion with classical RK4 in the
/// interaction picture of the static Hamiltonian, restricted to the
/// eigenstates within the energy window (plus any the initial state touches).
/// A midpoint carrier directive is resolved from the static spectrum.
/// Throws StepSizeError when the norm drifts by more than 1e-5.
Trajectory evolve_driven(const SystemParams& p, const PulseSpec& pulse, const QuantumState& psi0,
                         std::span<const double> times, std::span<const Observable> observables,
                         const DrivenOptions& options = {});

/// Same with a precomputed full decomposition of the static Hamiltonian.
Trajectory evolve_driven(const SystemParams& p, const EigenDecomposition& eig, const PulseSpec& pulse,
                         const QuantumState& psi0, std::span<const double> times,
                         std::span<const Observable> observables, const DrivenOptions& options = {});

/// The step evolve_driven picks when options.dt is 0.
double default_driven_step(const EigenDecomposition& eig, const QuantumState& psi0, double carrier,
                           const DrivenOptions& options = {});

/// Envelope gain that makes `pulse` a pi pulse on from -> to. Each line
/// from -> E_j contributes <to|E_j><E_j|X_1|from> weighted by the pulse
/// spectrum exp(-(delta_j tau)^2 / 2) at its detuning delta_j from the carrier;
/// with m the modulus of the sum, the rotating-wave angle m * area equals pi.
/// `eig` is the full decomposition of the static Hamiltonian. A midpoint carrier
/// is resolved from it. Throws ConfigError when the filtered element vanishes.
double pi_pulse_area_scale(const SystemParams& p, Basis basis, const PulseSpec& pulse, const QuantumState& from,
                           const QuantumState& to, const EigenDecomposition& eig);

/// The pulse with a midpoint carrier replaced by its value on `eig`.
PulseSpec resolve_carrier(const PulseSpec& pulse, const EigenDecomposition& eig);

/// Joint-absorption time pi / (2 omega_eff). Throws ConfigError for omega_eff <= 0.
double rabi_period(double omega_eff);

/// `points` evenly spaced times on [0, t_max].
std::vector<double> uniform_times(double t_max, Index points);

}  // namespace uscqed
