#include "uscqed/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace uscqed {

namespace {

constexpr double kPi = std::numbers::pi;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view s, std::string_view context) {
  s = trim(s);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("cannot parse integer '" + std::string(s) + "' in '" + std::string(context) + "'");
  }
  return value;
}

bool is_phase_supported(double phi) {
  return std::abs(phi) <= 1e-12 || std::abs(phi - kPi) <= 1e-12;
}

}  // namespace

std::string to_string(Basis basis) { return basis == Basis::bare ? "bare" : "supermode"; }

Basis parse_basis(std::string_view text) {
  if (text == "bare") return Basis::bare;
  if (text == "supermode") return Basis::supermode;
  throw ConfigError("unknown basis '" + std::string(text) + "' (expected bare or supermode)");
}

// ---- SystemParams -------------------------------------------------------------

SystemParams SystemParams::two_cavity() { return SystemParams{}; }

SystemParams SystemParams::three_cavity(double delta) {
  SystemParams p;
  p.n_cavities = 3;
  p.omega_c = {1.0, 1.0, 1.0};
  p.delta = delta;
  return p;
}

SystemParams SystemParams::with_omega_q(double omega) const {
  SystemParams p = *this;
  p.omega_q.assign(2, omega);
  return p;
}

SystemParams SystemParams::with_n_max(int n) const {
  SystemParams p = *this;
  p.n_max = n;
  p.auto_n_max = false;
  return p;
}

std::vector<std::string> SystemParams::validation_errors() const {
  std::vector<std::string> errors;
  auto finite = [](double x) { return std::isfinite(x); };
  if (n_cavities != 2 && n_cavities != 3) {
    errors.push_back("system.n_cavities: must be 2 or 3, got " + std::to_string(n_cavities));
  }
  if (static_cast<int>(omega_c.size()) != n_cavities) {
    errors.push_back("system.omega_c: expected " + std::to_string(n_cavities) + " entries, got " +
                     std::to_string(omega_c.size()));
  } else {
    for (std::size_t i = 0; i < omega_c.size(); ++i) {
      if (!finite(omega_c[i]) || omega_c[i] <= 0.0) {
        errors.push_back("system.omega_c[" + std::to_string(i) + "]: must be a positive frequency");
      }
    }
    if (n_cavities == 3 && omega_c[0] != omega_c[2]) {
      errors.push_back("system.omega_c: the two end cavities must be resonant");
    }
  }
  if (!finite(delta)) errors.push_back("system.delta: must be finite");
  if (n_cavities == 2 && delta != 0.0) errors.push_back("system.delta: only defined for three-cavity arrays");
  if (n_cavities == 3 && finite(delta) && omega_c.size() == 3 && omega_c[1] + delta <= 0.0) {
    errors.push_back("system.delta: central cavity frequency must stay positive");
  }
  if (omega_q.size() != 2) {
    errors.push_back("system.omega_q: expected 2 entries (one per qubit), got " + std::to_string(omega_q.size()));
  } else {
    for (std::size_t i = 0; i < 2; ++i) {
      if (!finite(omega_q[i]) || omega_q[i] <= 0.0) {
        errors.push_back("system.omega_q[" + std::to_string(i) + "]: must be a positive frequency");
      }
    }
  }
  if (!finite(J) || J <= 0.0) errors.push_back("system.J: hopping rate must be > 0");
  if (!finite(g_abs) || g_abs < 0.0) errors.push_back("system.g_abs: coupling must be >= 0");
  if (phases.size() != 2) {
    errors.push_back("system.phases: expected 2 entries (one per qubit), got " + std::to_string(phases.size()));
  } else {
    for (std::size_t i = 0; i < 2; ++i) {
      if (!is_phase_supported(phases[i])) {
        errors.push_back("system.phases[" + std::to_string(i) + "]: unsupported phase " +
                         std::to_string(phases[i]) + " (only 0 and pi are supported)");
      }
    }
  }
  if (!finite(theta)) errors.push_back("system.theta: must be finite");
  if (n_max < 1) errors.push_back("system.n_max: must be >= 1");
  return errors;
}

void SystemParams::validate() const {
  const auto errors = validation_errors();
  if (errors.empty()) return;
  std::string joined;
  bool phase_only = true;
  for (const auto& e : errors) {
    if (!joined.empty()) joined += "; ";
    joined += e;
    if (e.rfind("system.phases", 0) != 0) phase_only = false;
  }
  if (phase_only) throw UnsupportedParameter(joined);
  throw ConfigError(joined);
}

double SystemParams::cavity_frequency(int n) const {
  const double w = omega_c.at(static_cast<std::size_t>(n));
  return (n_cavities == 3 && n == 1) ? w + delta : w;
}

int SystemParams::coupled_cavity(int qubit) const {
  if (qubit < 0 || qubit > 1) throw std::out_of_range("qubit index must be 0 or 1");
  return n_cavities == 3 ? 2 * qubit : qubit;
}

int SystemParams::phase_sign(int qubit) const {
  return std::abs(phases.at(static_cast<std::size_t>(qubit))) <= 1e-12 ? 1 : -1;
}

// ---- supermodes ---------------------------------------------------------------

Index SupermodeTransform::row_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<Index>(i);
  }
  throw std::out_of_range("no normal mode labelled '" + label + "'");
}

SupermodeTransform supermode_transform(const SystemParams& p) {
  p.validate();
  SupermodeTransform t;
  const double J = p.J;
  if (p.n_cavities == 2) {
    if (p.omega_c[0] != p.omega_c[1]) {
      throw ConfigError("system.omega_c: supermodes are defined for identical cavities");
    }
    const double r = 1.0 / std::sqrt(2.0);
    t.matrix.resize(2, 2);
    t.matrix << r, r, r, -r;
    t.mode_frequencies.resize(2);
    t.mode_frequencies << p.omega_c[0] + J, p.omega_c[0] - J;
    t.labels = {"S", "A"};
    return t;
  }
  const double we = p.cavity_frequency(0);
  const double d = p.cavity_frequency(1) - we;  // central detuning
  const double omega = std::sqrt(8.0 * J * J + d * d);
  const double n_minus = std::sqrt(8.0 * J * J + (d - omega) * (d - omega));
  const double n_plus = std::sqrt(8.0 * J * J + (d + omega) * (d + omega));
  const double r = 1.0 / std::sqrt(2.0);
  t.matrix.resize(3, 3);
  t.matrix << 2.0 * J / n_minus, (d - omega) / n_minus, 2.0 * J / n_minus,  //
      -r, 0.0, r,                                                            //
      2.0 * J / n_plus, (d + omega) / n_plus, 2.0 * J / n_plus;
  t.mode_frequencies.resize(3);
  t.mode_frequencies << (2.0 * we + d - omega) / 2.0, we, (2.0 * we + d + omega) / 2.0;
  t.labels = {"S1", "A", "S2"};
  return t;
}

namespace {

std::vector<std::string> supermode_order(int n_cavities) {
  return n_cavities == 2 ? std::vector<std::string>{"A", "S"} : std::vector<std::string>{"S1", "S2", "A"};
}

/// Transform row feeding each cavity mode of the supermode space.
std::vector<Index> supermode_rows(const SystemParams& p, const SupermodeTransform& t) {
  std::vector<Index> rows;
  for (const auto& label : supermode_order(p.n_cavities)) rows.push_back(t.row_of(label));
  return rows;
}

Eigen::MatrixXcd qubit_coupling_matrix(double theta) {
  return std::cos(theta) * pauli_matrix(PauliAxis::x) + std::sin(theta) * pauli_matrix(PauliAxis::z);
}

/// Diagonal of sum_k w_k n_k + sum_j wq_j |e><e|_j.
Eigen::VectorXd free_energies(const HilbertSpace& space, const std::vector<double>& mode_freqs,
                              const std::vector<double>& qubit_freqs) {
  const Index n = space.total_dim();
  Eigen::VectorXd diag(n);
  std::vector<double> freqs = mode_freqs;
  freqs.insert(freqs.end(), qubit_freqs.begin(), qubit_freqs.end());
  for (Index b = 0; b < n; ++b) {
    const auto occ = space.occupations(b);
    double e = 0.0;
    for (std::size_t m = 0; m < occ.size(); ++m) e += freqs[m] * occ[m];
    diag[b] = e;
  }
  return diag;
}

}  // namespace

SpacePtr bare_space(const SystemParams& p) {
  p.validate();
  std::vector<ModeSpec> modes;
  for (int n = 0; n < p.n_cavities; ++n) modes.push_back(ModeSpec::cavity(p.n_max, std::to_string(n + 1)));
  modes.push_back(ModeSpec::qubit("q1"));
  modes.push_back(ModeSpec::qubit("q2"));
  return make_space(std::move(modes));
}

SpacePtr supermode_space(const SystemParams& p) {
  p.validate();
  std::vector<ModeSpec> modes;
  for (const auto& label : supermode_order(p.n_cavities)) modes.push_back(ModeSpec::cavity(p.n_max, label));
  modes.push_back(ModeSpec::qubit("q1"));
  modes.push_back(ModeSpec::qubit("q2"));
  return make_space(std::move(modes));
}

SpacePtr space_for(const SystemParams& p, Basis basis) {
  return basis == Basis::bare ? bare_space(p) : supermode_space(p);
}

Operator build_bare_hamiltonian(const SystemParams& p) {
  auto space = bare_space(p);
  const int N = p.n_cavities;
  const std::size_t q0 = static_cast<std::size_t>(N);

  std::vector<double> cav(N);
  for (int n = 0; n < N; ++n) cav[n] = p.cavity_frequency(n);
  OperatorAssembler acc(space);
  acc.add_diagonal(free_energies(*space, cav, p.omega_q));

  const Eigen::MatrixXcd a = ladder_matrix(p.n_max + 1);
  const Eigen::MatrixXcd ad = a.adjoint();
  const Eigen::MatrixXcd x = a + ad;
  const Eigen::MatrixXcd coupling = qubit_coupling_matrix(p.theta);

  for (int n = 0; n + 1 < N; ++n) {
    const auto m = static_cast<std::size_t>(n);
    acc.add(p.J, {{m, &ad}, {m + 1, &a}});
    acc.add(p.J, {{m, &a}, {m + 1, &ad}});
  }
  for (int q = 0; q < 2; ++q) {
    const auto cavity = static_cast<std::size_t>(p.coupled_cavity(q));
    acc.add(p.g_abs * p.phase_sign(q), {{cavity, &x}, {q0 + static_cast<std::size_t>(q), &coupling}});
  }
  return std::move(acc).finish(true);
}

Operator build_supermode_hamiltonian(const SystemParams& p) {
  const auto t = supermode_transform(p);
  auto space = supermode_space(p);
  const int N = p.n_cavities;
  const std::size_t q0 = static_cast<std::size_t>(N);
  const auto rows = supermode_rows(p, t);

  std::vector<double> freqs(N);
  for (int k = 0; k < N; ++k) freqs[k] = t.mode_frequencies[rows[k]];
  OperatorAssembler acc(space);
  acc.add_diagonal(free_energies(*space, freqs, p.omega_q));

  const Eigen::MatrixXcd a = ladder_matrix(p.n_max + 1);
  const Eigen::MatrixXcd x = a + a.adjoint();
  const Eigen::MatrixXcd coupling = qubit_coupling_matrix(p.theta);
  // X_cavity(q) = sum_k M(row_k, cavity(q)) X_k
  for (int q = 0; q < 2; ++q) {
    const int cavity = p.coupled_cavity(q);
    for (int k = 0; k < N; ++k) {
      const double c = p.g_abs * p.phase_sign(q) * t.matrix(rows[k], cavity);
      if (c == 0.0) continue;
      acc.add(c, {{static_cast<std::size_t>(k), &x}, {q0 + static_cast<std::size_t>(q), &coupling}});
    }
  }
  return std::move(acc).finish(true);
}

Operator build_hamiltonian(const SystemParams& p, Basis basis) {
  return basis == Basis::bare ? build_bare_hamiltonian(p) : build_supermode_hamiltonian(p);
}

Operator drive_quadrature(const SystemParams& p, Basis basis) {
  auto space = space_for(p, basis);
  const Eigen::MatrixXcd a = ladder_matrix(p.n_max + 1);
  const Eigen::MatrixXcd x = a + a.adjoint();
  OperatorAssembler acc(space);
  if (basis == Basis::bare) {
    acc.add(1.0, {{0, &x}});
  } else {
    const auto t = supermode_transform(p);
    const auto rows = supermode_rows(p, t);
    for (int k = 0; k < p.n_cavities; ++k) {
      const double c = t.matrix(rows[k], 0);
      if (c != 0.0) acc.add(c, {{static_cast<std::size_t>(k), &x}});
    }
  }
  return std::move(acc).finish(true);
}

// ---- drive ----------------------------------------------------------------------

CarrierMidpoint CarrierMidpoint::parse(std::string_view text) {
  const std::string original(text);
  text = trim(text);
  if (text.rfind("mid:", 0) != 0) {
    throw ConfigError("carrier directive '" + original + "' must start with 'mid:'");
  }
  text.remove_prefix(4);
  CarrierMidpoint mid;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = pos;
    int depth = 0;
    while (comma < text.size() && !(text[comma] == ',' && depth == 0)) {
      if (text[comma] == '(') ++depth;
      if (text[comma] == ')') --depth;
      ++comma;
    }
    auto item = trim(text.substr(pos, comma - pos));
    std::vector<int> group;
    if (!item.empty() && item.front() == '(') {
      if (item.back() != ')') throw ConfigError("unbalanced parentheses in '" + original + "'");
      item = item.substr(1, item.size() - 2);
      std::size_t p0 = 0;
      while (p0 <= item.size()) {
        const auto plus = std::min(item.find('+', p0), item.size());
        group.push_back(parse_int(item.substr(p0, plus - p0), original));
        p0 = plus + 1;
      }
    } else {
      group.push_back(parse_int(item, original));
    }
    mid.groups.push_back(std::move(group));
    pos = comma + 1;
  }
  if (mid.groups.size() < 2) throw ConfigError("carrier directive '" + original + "' needs at least two levels");
  for (const auto& g : mid.groups) {
    for (int level : g) {
      if (level < 1) throw ConfigError("carrier directive '" + original + "' refers to level " +
                                       std::to_string(level) + "; excited levels start at 1");
    }
  }
  return mid;
}

std::string CarrierMidpoint::to_string() const {
  std::ostringstream os;
  os << "mid:";
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (i) os << ',';
    if (groups[i].size() == 1) {
      os << groups[i][0];
    } else {
      os << '(';
      for (std::size_t j = 0; j < groups[i].size(); ++j) os << (j ? "+" : "") << groups[i][j];
      os << ')';
    }
  }
  return os.str();
}

int CarrierMidpoint::highest_level() const {
  int top = 0;
  for (const auto& g : groups) top = std::max(top, *std::max_element(g.begin(), g.end()));
  return top;
}

double CarrierMidpoint::resolve(const Eigen::VectorXd& relative_levels) const {
  double sum = 0.0;
  for (const auto& g : groups) {
    double mean = 0.0;
    for (int level : g) {
      if (level >= relative_levels.size()) {
        throw ContractViolation("carrier directive needs level " + std::to_string(level));
      }
      mean += relative_levels[level];
    }
    sum += mean / static_cast<double>(g.size());
  }
  return sum / static_cast<double>(groups.size());
}

void PulseSpec::validate() const {
  if (!std::isfinite(amplitude) || amplitude < 0.0) throw ConfigError("pulse.amplitude: must be >= 0");
  if (!std::isfinite(tau) || tau <= 0.0) throw ConfigError("pulse.tau: must be > 0");
  if (!std::isfinite(t0)) throw ConfigError("pulse.t0: must be finite");
  if (!std::isfinite(area_scale) || area_scale <= 0.0) throw ConfigError("pulse.area_scale: must be > 0");
  if (carrier_resolved() && !std::isfinite(std::get<double>(omega_d))) {
    throw ConfigError("pulse.omega_d: must be finite");
  }
}

double PulseSpec::carrier() const {
  if (!carrier_resolved()) {
    throw ContractViolation("pulse carrier '" + std::get<CarrierMidpoint>(omega_d).to_string() +
                            "' has not been resolved against the spectrum");
  }
  return std::get<double>(omega_d);
}

double PulseSpec::denominator() const {
  return norm == EnvelopeNorm::literal ? tau * std::sqrt(2.0) * kPi : tau * std::sqrt(2.0 * kPi);
}

double PulseSpec::area() const { return area_scale * amplitude * tau * std::sqrt(2.0 * kPi) / denominator(); }

double pulse_envelope(const PulseSpec& pulse, double t) {
  const double u = (t - pulse.t0) / pulse.tau;
  return pulse.area_scale * pulse.amplitude * std::exp(-0.5 * u * u) / pulse.denominator();
}

Operator drive_hamiltonian(const SystemParams& p, const PulseSpec& pulse, double t, Basis basis) {
  pulse.validate();
  const double f = pulse_envelope(pulse, t) * std::cos(pulse.carrier() * t);
  return f * drive_quadrature(p, basis);
}

// ---- labelled states ----------------------------------------------------------

QuantumState bare_label_state(const SpacePtr& space, std::span<const int> occupations) {
  return QuantumState::basis(space, space->flat_index(occupations));
}

namespace {

void check_label(const SystemParams& p, std::span<const int> occ) {
  const auto expected = static_cast<std::size_t>(p.n_cavities + 2);
  if (occ.size() != expected) {
    throw std::out_of_range("state label needs " + std::to_string(expected) + " entries, got " +
                            std::to_string(occ.size()));
  }
  for (int k = 0; k < p.n_cavities; ++k) {
    if (occ[k] < 0 || occ[k] > p.n_max) {
      throw std::out_of_range("photon number " + std::to_string(occ[k]) + " exceeds n_max = " +
                              std::to_string(p.n_max));
    }
  }
  for (int q = 0; q < 2; ++q) {
    if (occ[p.n_cavities + q] != 0 && occ[p.n_cavities + q] != 1) {
      throw std::out_of_range("qubit occupation must be 0 (g) or 1 (e)");
    }
  }
}

/// amplitudes <- sum_t c_t b_t^dag amplitudes, over the cavity modes of `space`.
Eigen::VectorXcd raise(const HilbertSpace& space, const Eigen::VectorXcd& in, const std::vector<double>& coeffs) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(in.size());
  for (Index b = 0; b < in.size(); ++b) {
    if (in[b] == 0.0) continue;
    for (std::size_t m = 0; m < coeffs.size(); ++m) {
      if (coeffs[m] == 0.0) continue;
      const int dim = space.mode(m).dim;
      const int level = static_cast<int>((b / space.stride(m)) % dim);
      if (level + 1 >= dim) continue;  // leaves the truncated space; caught by the norm check
      out[b + space.stride(m)] += in[b] * coeffs[m] * std::sqrt(static_cast<double>(level + 1));
    }
  }
  return out;
}

}  // namespace

QuantumState prepare_state(const SystemParams& p, Basis target, Basis label_basis, std::span<const int> occupations) {
  check_label(p, occupations);
  auto space = space_for(p, target);
  if (target == label_basis) return bare_label_state(space, occupations);

  const auto t = supermode_transform(p);
  const auto rows = supermode_rows(p, t);
  const int N = p.n_cavities;

  std::vector<int> start(occupations.begin(), occupations.end());
  std::fill(start.begin(), start.begin() + N, 0);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(space->total_dim());
  v[space->flat_index(start)] = 1.0;

  for (int i = 0; i < N; ++i) {
    // creation operator of label mode i in terms of target cavity modes
    std::vector<double> coeffs(N);
    for (int m = 0; m < N; ++m) {
      coeffs[m] = label_basis == Basis::supermode ? t.matrix(rows[i], m)   // b_i^dag = sum_n M a_n^dag
                                                  : t.matrix(rows[m], i);  // a_i^dag = sum_k M(k, i) b_k^dag
    }
    double factorial = 1.0;
    for (int k = 1; k <= occupations[i]; ++k) {
      v = raise(*space, v, coeffs);
      factorial *= k;
    }
    v /= std::sqrt(factorial);
  }
  if (std::abs(v.norm() - 1.0) > 1e-12) {
    throw std::out_of_range("state is not representable at n_max = " + std::to_string(p.n_max));
  }
  return QuantumState(std::move(space), std::move(v));
}

QuantumState supermode_label_state(const SystemParams& p, std::span<const int> occupations) {
  return prepare_state(p, Basis::bare, Basis::supermode, occupations);
}

std::vector<int> parse_occupations(std::string_view text) {
  std::vector<int> occ;
  std::size_t pos = 0;
  const std::string original(text);
  while (pos <= text.size()) {
    const auto comma = std::min(text.find(',', pos), text.size());
    const auto item = trim(text.substr(pos, comma - pos));
    if (item == "g") occ.push_back(0);
    else if (item == "e") occ.push_back(1);
    else occ.push_back(parse_int(item, original));
    pos = comma + 1;
  }
  return occ;
}

QuantumState resolve_state_label(const SystemParams& p, Basis target, std::string_view label) {
  p.validate();
  const int N = p.n_cavities;
  std::vector<int> occ(static_cast<std::size_t>(N + 2), 0);
  const std::string text(trim(label));
  if (text == "vac" || text == "gg") return prepare_state(p, target, target, occ);
  if (text == "ee" || text == "eg" || text == "ge") {
    occ[N] = text[0] == 'e';
    occ[N + 1] = text[1] == 'e';
    return prepare_state(p, target, target, occ);
  }
  if (text.rfind("bare:", 0) == 0) return prepare_state(p, target, Basis::bare, parse_occupations(text.substr(5)));
  if (text.rfind("supermode:", 0) == 0) {
    return prepare_state(p, target, Basis::supermode, parse_occupations(text.substr(10)));
  }
  if (text.rfind("1_", 0) == 0) {
    const std::string mode = text.substr(2);
    const bool bare_mode = !mode.empty() && std::all_of(mode.begin(), mode.end(), [](char c) {
      return std::isdigit(static_cast<unsigned char>(c));
    });
    if (bare_mode) {
      const int n = parse_int(mode, text);
      if (n < 1 || n > N) throw ConfigError("state label '" + text + "': no cavity " + mode);
      occ[n - 1] = 1;
      return prepare_state(p, target, Basis::bare, occ);
    }
    const auto order = supermode_order(N);
    const auto it = std::find(order.begin(), order.end(), mode);
    if (it == order.end()) throw ConfigError("state label '" + text + "': no normal mode " + mode);
    occ[static_cast<std::size_t>(it - order.begin())] = 1;
    return prepare_state(p, target, Basis::supermode, occ);
  }
  throw ConfigError("unknown state label '" + text + "'");
}

// ---- symmetry -------------------------------------------------------------------

std::optional<Reflection> reflection_symmetry(const SystemParams& p, Basis basis) {
  p.validate();
  if (p.omega_q[0] != p.omega_q[1]) return std::nullopt;
  const int N = p.n_cavities;
  for (int n = 0; n < N; ++n) {
    if (p.cavity_frequency(n) != p.cavity_frequency(N - 1 - n)) return std::nullopt;
  }
  const bool opposite = p.phase_sign(0) != p.phase_sign(1);
  auto space = space_for(p, basis);

  // Per-photon sign of each cavity mode under the symmetry.
  std::vector<int> mode_sign(static_cast<std::size_t>(N), opposite ? -1 : 1);
  if (basis == Basis::supermode) {
    const auto order = supermode_order(N);
    for (int k = 0; k < N; ++k) {
      const int mirror = order[k] == "A" ? -1 : 1;
      mode_sign[k] = mirror * (opposite ? -1 : 1);
    }
  }

  Reflection r;
  const Index dim = space->total_dim();
  r.image.resize(static_cast<std::size_t>(dim));
  r.sign.resize(static_cast<std::size_t>(dim));
  for (Index b = 0; b < dim; ++b) {
    auto occ = space->occupations(b);
    int sign = 1;
    for (int k = 0; k < N; ++k) {
      if (mode_sign[k] < 0 && occ[k] % 2) sign = -sign;
    }
    if (basis == Basis::bare) std::reverse(occ.begin(), occ.begin() + N);
    std::swap(occ[N], occ[N + 1]);
    r.image[b] = space->flat_index(occ);
    r.sign[b] = static_cast<signed char>(sign);
  }
  return r;
}

}  // namespace uscqed
