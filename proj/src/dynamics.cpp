#include "uscqed/dynamics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "uscqed/spectrum.hpp"

namespace uscqed {

namespace {

constexpr double kNormTolerance = 1e-10;
constexpr double kStepFailureDrift = 1e-5;

std::string sanitize(std::string_view text) {
  std::string out;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out += static_cast<char>(std::tolower(u));
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

void check_normalized(const QuantumState& psi) {
  if (std::abs(psi.norm() - 1.0) > kNormTolerance) {
    throw ContractViolation("initial state is not normalised (norm " + std::to_string(psi.norm()) + ")");
  }
}

void check_observables(const SpacePtr& space, std::span<const Observable> observables) {
  for (const auto& o : observables) {
    if (!same_space(space, o.space())) {
      throw ModeTypeError("observable '" + o.name() + "' is defined on a different space");
    }
  }
}

void check_times(std::span<const double> times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw ConfigError("time grid contains a non-finite value");
    if (i > 0 && times[i] <= times[i - 1]) throw ConfigError("time grid must be strictly ascending");
  }
}

/// Photon number of sum_i w_i a_i over the cavity modes `modes` of `space`.
Eigen::MatrixXcd combined_number(const SpacePtr& space, const std::vector<std::size_t>& modes,
                                 const Eigen::VectorXd& w) {
  OperatorAssembler acc(space);
  std::vector<Eigen::MatrixXcd> a, ad, n;
  for (auto m : modes) {
    a.push_back(ladder_matrix(space->mode(m).dim));
    ad.push_back(a.back().adjoint());
    n.push_back(ad.back() * a.back());
  }
  for (std::size_t i = 0; i < modes.size(); ++i) {
    for (std::size_t j = 0; j < modes.size(); ++j) {
      const double c = w[static_cast<Index>(i)] * w[static_cast<Index>(j)];
      if (c == 0.0) continue;
      if (i == j) {
        acc.add(c, {LocalFactor{modes[i], &n[i]}});
      } else {
        acc.add(c, {LocalFactor{modes[i], &ad[i]}, LocalFactor{modes[j], &a[j]}});
      }
    }
  }
  return std::move(acc).finish(true).matrix();
}

}  // namespace

// ---- observables ------------------------------------------------------------

std::string to_string(ObservableKind kind) {
  switch (kind) {
    case ObservableKind::state_projector: return "state_projector";
    case ObservableKind::qubit_joint_excited: return "qubit_joint_excited";
    case ObservableKind::photon_number: return "photon_number";
  }
  return "?";
}

ObservableKind parse_observable_kind(std::string_view text) {
  if (text == "state_projector") return ObservableKind::state_projector;
  if (text == "qubit_joint_excited") return ObservableKind::qubit_joint_excited;
  if (text == "photon_number") return ObservableKind::photon_number;
  throw ConfigError("unknown observable kind '" + std::string(text) +
                    "' (expected state_projector, qubit_joint_excited or photon_number)");
}

ObservableSpec ObservableSpec::projector(std::string label, std::string name) {
  return {ObservableKind::state_projector, std::move(label), std::move(name)};
}

ObservableSpec ObservableSpec::joint_excited(std::string name) {
  return {ObservableKind::qubit_joint_excited, {}, std::move(name)};
}

ObservableSpec ObservableSpec::photon_number(std::string mode, std::string name) {
  return {ObservableKind::photon_number, std::move(mode), std::move(name)};
}

ObservableSpec ObservableSpec::as_dressed() const {
  ObservableSpec out = *this;
  out.dressed = true;
  return out;
}

std::string ObservableSpec::default_name() const {
  std::string base;
  switch (kind) {
    case ObservableKind::qubit_joint_excited: base = "p_ee"; break;
    case ObservableKind::state_projector: {
      const std::string s = sanitize(payload);
      base = s == "ee" ? "p_ee_full" : "p_" + s;
      break;
    }
    case ObservableKind::photon_number: base = "n_" + sanitize(payload); break;
  }
  return dressed ? base + "_dressed" : base;
}

Observable::Observable(const SystemParams& p, Basis basis, const ObservableSpec& spec, const DressedFrame* frame)
    : spec_(spec), name_(spec.column_name()), space_(space_for(p, basis)) {
  const auto& space = *space_;
  std::optional<DressedFrame> own;
  if (spec.dressed) {
    if (spec.kind == ObservableKind::photon_number) throw ConfigError("photon_number has no dressed form");
    if (frame == nullptr) {
      own = dressed_frame(p, basis);
      frame = &*own;
    }
    if (!same_space(frame->space, space_)) throw ModeTypeError("dressed frame belongs to a different space");
    const std::string label = spec.kind == ObservableKind::qubit_joint_excited ? "ee" : spec.payload;
    target_ = frame->dress(resolve_state_label(p, basis, label)).amplitudes();
    return;
  }
  switch (spec.kind) {
    case ObservableKind::state_projector:
      target_ = resolve_state_label(p, basis, spec.payload).amplitudes();
      break;
    case ObservableKind::qubit_joint_excited: {
      const auto qubits = space.qubit_modes();
      diagonal_ = Eigen::VectorXd::Zero(space.total_dim());
      for (Index i = 0; i < space.total_dim(); ++i) {
        const auto occ = space.occupations(i);
        bool all = true;
        for (auto q : qubits) all = all && occ[q] == 1;
        diagonal_[i] = all ? 1.0 : 0.0;
      }
      break;
    }
    case ObservableKind::photon_number: {
      const std::string& label = spec.payload;
      const auto native = std::find_if(space.modes().begin(), space.modes().end(),
                                       [&](const ModeSpec& m) { return m.label == label; });
      if (native != space.modes().end()) {
        if (native->kind != ModeKind::cavity) throw ConfigError("photon_number: mode '" + label + "' is a qubit");
        const auto m = static_cast<std::size_t>(native - space.modes().begin());
        diagonal_.resize(space.total_dim());
        for (Index i = 0; i < space.total_dim(); ++i) diagonal_[i] = space.occupations(i)[m];
        break;
      }
      // Mode of the other basis: expand it over this space's cavity modes.
      const SupermodeTransform t = supermode_transform(p);
      const int N = p.n_cavities;
      std::vector<std::size_t> modes(static_cast<std::size_t>(N));
      for (int i = 0; i < N; ++i) modes[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
      Eigen::VectorXd w(N);
      if (basis == Basis::supermode) {
        int cavity = 0;
        try {
          cavity = std::stoi(label);
        } catch (const std::exception&) {
          cavity = 0;
        }
        if (cavity < 1 || cavity > N || std::to_string(cavity) != label) {
          throw ConfigError("photon_number: no mode labelled '" + label + "'");
        }
        for (int i = 0; i < N; ++i) w[i] = t.matrix(t.row_of(space.mode(static_cast<std::size_t>(i)).label), cavity - 1);
      } else {
        Index row = 0;
        try {
          row = t.row_of(label);
        } catch (const std::out_of_range&) {
          throw ConfigError("photon_number: no mode labelled '" + label + "'");
        }
        for (int n = 0; n < N; ++n) w[n] = t.matrix(row, n);
      }
      operator_ = combined_number(space_, modes, w);
      break;
    }
  }
}

double Observable::evaluate(const QuantumState& psi) const {
  if (!same_space(space_, psi.space())) throw ModeTypeError("observable '" + name_ + "' is defined on a different space");
  return evaluate(psi.amplitudes());
}

double Observable::evaluate(const Eigen::VectorXcd& v) const {
  if (target_.size() > 0) return std::norm(target_.dot(v));
  if (diagonal_.size() > 0) return (diagonal_.array() * v.array().abs2()).sum();
  return v.dot(operator_ * v).real();
}

std::vector<Observable> compile_observables(const SystemParams& p, Basis basis, std::span<const ObservableSpec> specs,
                                            const DressedFrame* frame) {
  std::optional<DressedFrame> own;
  const bool any_dressed = std::any_of(specs.begin(), specs.end(), [](const ObservableSpec& s) { return s.dressed; });
  if (any_dressed && frame == nullptr) {
    own = dressed_frame(p, basis);
    frame = &*own;
  }
  std::vector<Observable> out;
  out.reserve(specs.size());
  for (const auto& s : specs) out.emplace_back(p, basis, s, frame);
  return out;
}

double occupation_probability(const SystemParams& p, const QuantumState& psi, Basis basis, const ObservableSpec& spec,
                              const DressedFrame* frame) {
  return Observable(p, basis, spec, frame).evaluate(psi);
}

const std::vector<double>& Trajectory::series(const std::string& name) const {
  for (const auto& [n, v] : observables) {
    if (n == name) return v;
  }
  throw std::out_of_range("trajectory has no observable '" + name + "'");
}

// ---- free evolution -----------------------------------------------------------

Trajectory evolve_free(const Operator& H, const QuantumState& psi0, std::span<const double> times,
                       std::span<const Observable> observables) {
  if (!same_space(H.space(), psi0.space())) throw ModeTypeError("Hamiltonian and state live on different spaces");
  return evolve_free(eig_hermitian(H), psi0, times, observables);
}

Trajectory evolve_free(const EigenDecomposition& eig, const QuantumState& psi0, std::span<const double> times,
                       std::span<const Observable> observables) {
  if (!same_space(eig.space, psi0.space())) throw ModeTypeError("decomposition and state live on different spaces");
  const Index n = psi0.dim();
  if (eig.eigenvectors.cols() != n) throw ContractViolation("free evolution needs the full eigendecomposition");
  check_normalized(psi0);
  check_observables(psi0.space(), observables);
  check_times(times);

  // Components with an exactly zero overlap (other symmetry sector) never contribute.
  const Eigen::VectorXcd c = eig.eigenvectors.adjoint() * psi0.amplitudes();
  std::vector<Index> keep;
  for (Index j = 0; j < n; ++j) {
    if (c[j] != Complex(0.0)) keep.push_back(j);
  }
  const Index r = static_cast<Index>(keep.size());
  Eigen::MatrixXcd V(n, r);
  Eigen::VectorXcd ck(r);
  Eigen::VectorXd lam(r);
  for (Index k = 0; k < r; ++k) {
    V.col(k) = eig.eigenvectors.col(keep[static_cast<std::size_t>(k)]);
    ck[k] = c[keep[static_cast<std::size_t>(k)]];
    lam[k] = eig.eigenvalues[keep[static_cast<std::size_t>(k)]];
  }

  Trajectory traj{{times.begin(), times.end()}, {}, psi0, 0.0, 0.0, std::nullopt, 0};
  for (const auto& o : observables) traj.observables.emplace_back(o.name(), std::vector<double>(times.size()));

  constexpr Index kBatch = 128;
  const Index T = static_cast<Index>(times.size());
  Eigen::MatrixXcd phases;
  Eigen::MatrixXcd psi;
  for (Index b0 = 0; b0 < T; b0 += kBatch) {
    const Index nb = std::min(kBatch, T - b0);
    phases.resize(r, nb);
    for (Index b = 0; b < nb; ++b) {
      const double t = times[static_cast<std::size_t>(b0 + b)];
      for (Index k = 0; k < r; ++k) phases(k, b) = ck[k] * std::polar(1.0, -lam[k] * t);
    }
    psi.noalias() = V * phases;
    for (Index b = 0; b < nb; ++b) {
      const auto col = psi.col(b);
      traj.norm_drift = std::max(traj.norm_drift, std::abs(col.norm() - 1.0));
      const Eigen::VectorXcd v = col;
      for (std::size_t o = 0; o < observables.size(); ++o) {
        traj.observables[o].second[static_cast<std::size_t>(b0 + b)] = observables[o].evaluate(v);
      }
      if (b0 + b == T - 1) traj.final_state = QuantumState(psi0.space(), v);
    }
  }
  return traj;
}

// ---- driven evolution ---------------------------------------------------------

namespace {

std::vector<Index> retained_levels(const EigenDecomposition& eig, const Eigen::VectorXcd& c_full, double window) {
  std::vector<Index> keep;
  for (Index j = 0; j < eig.size(); ++j) {
    if (eig.eigenvalues[j] - eig.eigenvalues[0] <= window || std::abs(c_full[j]) > 1e-12) keep.push_back(j);
  }
  return keep;
}

void check_full(const EigenDecomposition& eig, const SpacePtr& space) {
  if (!same_space(eig.space, space) || eig.size() != space->total_dim() || eig.eigenvectors.cols() != eig.size()) {
    throw ContractViolation("driven evolution needs the full decomposition of the static Hamiltonian");
  }
}

}  // namespace

double default_driven_step(const EigenDecomposition& eig, const QuantumState& psi0, double carrier,
                           const DrivenOptions& options) {
  check_full(eig, psi0.space());
  const Eigen::VectorXcd c_full = eig.eigenvectors.adjoint() * psi0.amplitudes();
  double lam_max = 0.0;
  for (Index j : retained_levels(eig, c_full, options.energy_window)) {
    lam_max = std::max(lam_max, eig.eigenvalues[j] - eig.eigenvalues[0]);
  }
  return 2.0 * std::numbers::pi / (200.0 * std::max(lam_max, carrier));
}

Trajectory evolve_driven(const SystemParams& p, const PulseSpec& pulse, const QuantumState& psi0,
                         std::span<const double> times, std::span<const Observable> observables,
                         const DrivenOptions& options) {
  p.validate();
  return evolve_driven(p, diagonalize(p, options.basis), pulse, psi0, times, observables, options);
}

Trajectory evolve_driven(const SystemParams& p, const EigenDecomposition& eig, const PulseSpec& pulse_in,
                         const QuantumState& psi0, std::span<const double> times,
                         std::span<const Observable> observables, const DrivenOptions& options) {
  p.validate();
  pulse_in.validate();
  const SpacePtr space = space_for(p, options.basis);
  if (!same_space(space, psi0.space())) throw ModeTypeError("initial state does not live on the driven system's space");
  check_full(eig, space);
  check_normalized(psi0);
  check_observables(space, observables);
  check_times(times);
  if (times.empty()) throw ConfigError("time grid is empty");
  if (times.front() < 0.0) throw ConfigError("driven evolution starts at t = 0; the time grid must be non-negative");
  if (!(options.energy_window > 0.0)) throw ConfigError("energy window must be positive");
  if (!(options.pulse_support >= 6.0)) throw ConfigError("pulse support must cover at least 6 tau");
  if (options.dt < 0.0 || !std::isfinite(options.dt)) throw ConfigError("dt must be non-negative and finite");

  const Index n = eig.size();
  const double ground = eig.eigenvalues[0];

  const PulseSpec pulse = resolve_carrier(pulse_in, eig);
  const double wd = pulse.carrier();

  const double on = pulse.t0 - options.pulse_support * pulse.tau;
  const double off = pulse.t0 + options.pulse_support * pulse.tau;
  if (pulse.t0 < 6.0 * pulse.tau || times.back() < pulse.t0 + 6.0 * pulse.tau) {
    throw ConfigError("time grid must cover the pulse from t0 - 6 tau >= 0 to t0 + 6 tau");
  }

  const Eigen::VectorXcd c_full = eig.eigenvectors.adjoint() * psi0.amplitudes();
  const std::vector<Index> keep = retained_levels(eig, c_full, options.energy_window);
  const Index r = static_cast<Index>(keep.size());
  Eigen::MatrixXcd V(n, r);
  Eigen::VectorXd lam(r);
  Eigen::VectorXcd c(r);
  for (Index k = 0; k < r; ++k) {
    const Index j = keep[static_cast<std::size_t>(k)];
    V.col(k) = eig.eigenvectors.col(j);
    lam[k] = eig.eigenvalues[j];
    c[k] = c_full[j];
  }
  const Eigen::MatrixXcd X = drive_quadrature(p, options.basis).matrix();
  const Eigen::MatrixXcd D = V.adjoint() * (X * V);

  const double lam_max = (lam.array() - ground).maxCoeff();
  const double dt = options.dt > 0.0 ? options.dt : 2.0 * std::numbers::pi / (200.0 * std::max(lam_max, wd));

  // Interaction picture: c_I(t) = exp(i Lambda t) c(t); only the drive term is stepped.
  Eigen::VectorXcd u(r), tmp(r);
  auto rhs = [&](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& out) {
    const double s = pulse_envelope(pulse, t) * std::cos(wd * t);
    for (Index k = 0; k < r; ++k) u[k] = std::polar(1.0, lam[k] * t);
    tmp = u.conjugate().cwiseProduct(y);
    out.noalias() = D * tmp;
    out = Complex(0.0, -s) * u.cwiseProduct(out);
  };

  Trajectory traj{{times.begin(), times.end()}, {}, psi0, 0.0, 0.0, std::nullopt, 0};
  traj.dt = dt;
  traj.carrier = wd;
  traj.retained_states = r;
  for (const auto& o : observables) traj.observables.emplace_back(o.name(), std::vector<double>(times.size()));

  Eigen::VectorXcd y = c;  // c_I at t = 0
  Eigen::VectorXcd k1(r), k2(r), k3(r), k4(r), stage(r);
  double t_now = 0.0;
  auto integrate_to = [&](double t_end) {
    const double a = std::max(t_now, on);
    const double b = std::min(t_end, off);
    if (b > a) {
      const auto steps = static_cast<long>(std::ceil((b - a) / dt));
      const double h = (b - a) / static_cast<double>(steps);
      for (long s = 0; s < steps; ++s) {
        const double t = a + static_cast<double>(s) * h;
        rhs(t, y, k1);
        stage = y + 0.5 * h * k1;
        rhs(t + 0.5 * h, stage, k2);
        stage = y + 0.5 * h * k2;
        rhs(t + 0.5 * h, stage, k3);
        stage = y + h * k3;
        rhs(t + h, stage, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double drift = std::abs(y.norm() - 1.0);
        traj.norm_drift = std::max(traj.norm_drift, drift);
        if (drift > kStepFailureDrift) {
          throw StepSizeError("norm drifted by " + std::to_string(drift) + " at t = " + std::to_string(t + h) +
                              " with dt = " + std::to_string(dt) + "; halve dt and rerun");
        }
      }
    }
    t_now = t_end;
  };

  Eigen::VectorXcd v(n);
  for (std::size_t i = 0; i < times.size(); ++i) {
    integrate_to(times[i]);
    for (Index k = 0; k < r; ++k) stage[k] = y[k] * std::polar(1.0, -lam[k] * times[i]);
    v.noalias() = V * stage;
    traj.norm_drift = std::max(traj.norm_drift, std::abs(v.norm() - 1.0));
    for (std::size_t o = 0; o < observables.size(); ++o) traj.observables[o].second[i] = observables[o].evaluate(v);
  }
  traj.final_state = QuantumState(space, v);
  return traj;
}

PulseSpec resolve_carrier(const PulseSpec& pulse, const EigenDecomposition& eig) {
  if (pulse.carrier_resolved()) return pulse;
  const auto& mid = std::get<CarrierMidpoint>(pulse.omega_d);
  if (mid.highest_level() >= eig.size()) throw ConfigError("carrier midpoint refers to a level beyond the truncated space");
  PulseSpec out = pulse;
  out.omega_d = mid.resolve(eig.eigenvalues.array() - eig.eigenvalues[0]);
  return out;
}

double pi_pulse_area_scale(const SystemParams& p, Basis basis, const PulseSpec& pulse_in, const QuantumState& from,
                           const QuantumState& to, const EigenDecomposition& eig) {
  const Operator X = drive_quadrature(p, basis);
  if (!same_space(X.space(), from.space()) || !same_space(X.space(), to.space()) || !same_space(X.space(), eig.space)) {
    throw ModeTypeError("pulse calibration inputs live on different spaces");
  }
  if (eig.eigenvectors.cols() != eig.size()) throw ContractViolation("pulse calibration needs eigenvectors");
  const PulseSpec pulse = resolve_carrier(pulse_in, eig);
  const Eigen::VectorXcd c_from = eig.eigenvectors.adjoint() * from.amplitudes();
  const Eigen::VectorXcd c_to = eig.eigenvectors.adjoint() * to.amplitudes();
  const Eigen::VectorXcd x_from = eig.eigenvectors.adjoint() * (X.matrix() * from.amplitudes());
  const double e_from = (c_from.cwiseAbs2().array() * eig.eigenvalues.array()).sum();
  Complex m = 0.0;
  for (Index j = 0; j < eig.size(); ++j) {
    const double delta = eig.eigenvalues[j] - e_from - pulse.carrier();
    m += std::conj(c_to[j]) * x_from[j] * std::exp(-0.5 * delta * delta * pulse.tau * pulse.tau);
  }
  PulseSpec unit = pulse;
  unit.area_scale = 1.0;
  const double area = unit.area();
  if (std::abs(m) < 1e-9 || !(area > 0.0)) throw ConfigError("pulse calibration: transition has no drive matrix element");
  return std::numbers::pi / (std::abs(m) * area);
}

double rabi_period(double omega_eff) {
  if (!(omega_eff > 0.0) || !std::isfinite(omega_eff)) throw ConfigError("rabi_period needs a positive effective coupling");
  return std::numbers::pi / (2.0 * omega_eff);
}

std::vector<double> uniform_times(double t_max, Index points) {
  if (points < 2 || !(t_max > 0.0)) throw ConfigError("uniform_times needs t_max > 0 and at least 2 points");
  std::vector<double> t(static_cast<std::size_t>(points));
  for (Index i = 0; i < points; ++i) t[static_cast<std::size_t>(i)] = t_max * static_cast<double>(i) / static_cast<double>(points - 1);
  return t;
}

}  // namespace uscqed
