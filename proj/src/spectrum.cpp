#include "uscqed/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/SVD>

namespace uscqed {

namespace {

/// Symmetry-adapted basis vector: (e_a + coeff_b e_b) / norm, b < 0 for a fixed point.
struct SectorColumn {
  Index a;
  Index b;
  double ca;
  double cb;
};

struct Sectors {
  std::vector<SectorColumn> even, odd;
};

Sectors build_sectors(const Reflection& r) {
  Sectors s;
  const Index n = static_cast<Index>(r.image.size());
  const double h = 1.0 / std::sqrt(2.0);
  for (Index b = 0; b < n; ++b) {
    const Index img = r.image[b];
    const double sg = r.sign[b];
    if (img == b) {
      (sg > 0 ? s.even : s.odd).push_back({b, -1, 1.0, 0.0});
    } else if (b < img) {
      s.even.push_back({b, img, h, h * sg});
      s.odd.push_back({b, img, h, -h * sg});
    }
  }
  return s;
}

Eigen::MatrixXd project(const Eigen::MatrixXd& H, const std::vector<SectorColumn>& cols) {
  const Index m = static_cast<Index>(cols.size());
  Eigen::MatrixXd out(m, m);
  for (Index q = 0; q < m; ++q) {
    const auto& cq = cols[q];
    for (Index p = 0; p <= q; ++p) {
      const auto& cp = cols[p];
      double v = cp.ca * cq.ca * H(cp.a, cq.a);
      if (cq.b >= 0) v += cp.ca * cq.cb * H(cp.a, cq.b);
      if (cp.b >= 0) {
        v += cp.cb * cq.ca * H(cp.b, cq.a);
        if (cq.b >= 0) v += cp.cb * cq.cb * H(cp.b, cq.b);
      }
      out(p, q) = out(q, p) = v;
    }
  }
  return out;
}

struct SectorSolution {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Eigenpairs of the whole space from per-sector solutions, lowest `count`.
EigenDecomposition solve(const SystemParams& p, Basis basis, Index count, bool vectors) {
  const Operator H = build_hamiltonian(p, basis);
  const Index n = H.dim();
  if (count < 0 || count > n) count = n;
  const auto symmetry = reflection_symmetry(p, basis);
  if (!symmetry || !H.is_real()) {
    return count == n ? eig_hermitian(H) : eig_hermitian_lowest(H, count, vectors);
  }

  const Eigen::MatrixXd Hr = H.matrix().real();
  const Sectors sectors = build_sectors(*symmetry);
  struct Candidate {
    double value;
    int sector;
    Index column;
  };
  std::vector<Candidate> pool;
  std::array<SectorSolution, 2> sol;
  const std::array<const std::vector<SectorColumn>*, 2> cols{&sectors.even, &sectors.odd};
  for (int s = 0; s < 2; ++s) {
    const Index m = static_cast<Index>(cols[s]->size());
    if (m == 0) continue;
    const Index want = std::min(count, m);
    eigh(project(Hr, *cols[s]), want == m ? -1 : want, vectors, sol[s].values, sol[s].vectors);
    for (Index j = 0; j < sol[s].values.size(); ++j) pool.push_back({sol[s].values[j], s, j});
  }
  std::stable_sort(pool.begin(), pool.end(), [](const Candidate& x, const Candidate& y) { return x.value < y.value; });
  pool.resize(static_cast<std::size_t>(count));

  EigenDecomposition out;
  out.space = H.space();
  out.eigenvalues.resize(count);
  if (vectors) out.eigenvectors = Eigen::MatrixXcd::Zero(n, count);
  for (Index k = 0; k < count; ++k) {
    const auto& c = pool[static_cast<std::size_t>(k)];
    out.eigenvalues[k] = c.value;
    if (!vectors) continue;
    const auto& columns = *cols[c.sector];
    const auto& v = sol[c.sector].vectors;
    for (Index r = 0; r < static_cast<Index>(columns.size()); ++r) {
      const double amp = v(r, c.column);
      out.eigenvectors(columns[r].a, k) += columns[r].ca * amp;
      if (columns[r].b >= 0) out.eigenvectors(columns[r].b, k) += columns[r].cb * amp;
    }
  }
  if (vectors) canonicalize_eigenvectors(out.eigenvalues, out.eigenvectors);
  return out;
}

}  // namespace

EigenDecomposition lowest_levels(const SystemParams& p, Basis basis, Index count, bool vectors) {
  if (count <= 0) throw ContractViolation("lowest_levels needs a positive level count");
  return solve(p, basis, count, vectors);
}

EigenDecomposition diagonalize(const SystemParams& p, Basis basis) { return solve(p, basis, -1, true); }

DominantLabel dominant_label(const QuantumState& state) {
  const auto& v = state.amplitudes();
  Index best = 0;
  double w = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double wi = std::norm(v[i]);
    if (wi > w * (1.0 + 1e-12)) {
      w = wi;
      best = i;
    }
  }
  return DominantLabel{state.space()->format_state(best), w, best};
}

// ---- truncation -------------------------------------------------------------

int resolve_n_max(const SystemParams& p, Basis basis, int n_levels, double tolerance, int start, Index guard) {
  const auto dim_of = [&](int n) {
    Index d = 4;
    for (int k = 0; k < p.n_cavities; ++k) d *= n + 1;
    return d;
  };
  int n = std::max(1, start);
  if (dim_of(n + 1) > guard) throw ConvergenceError("truncation guard reached before convergence could be tested");
  Eigen::VectorXd prev = lowest_levels(p.with_n_max(n), basis, n_levels, false).eigenvalues;
  while (true) {
    if (dim_of(n + 1) > guard) {
      throw ConvergenceError("levels still drift at n_max = " + std::to_string(n) +
                             "; dimension guard reached (lower n_levels or raise the guard)");
    }
    Eigen::VectorXd next = lowest_levels(p.with_n_max(n + 1), basis, n_levels, false).eigenvalues;
    if ((next - prev).cwiseAbs().maxCoeff() < tolerance) return n;
    prev = std::move(next);
    ++n;
  }
}

SystemParams resolve_truncation(const SystemParams& p, Basis basis, int n_levels) {
  if (!p.auto_n_max) return p;
  return p.with_n_max(resolve_n_max(p, basis, n_levels));
}

// ---- sweeps -----------------------------------------------------------------

SweepResult sweep_levels(const SystemParams& p, std::span<const double> grid, int n_levels,
                         const SweepOptions& options) {
  if (n_levels < 2) throw ConfigError("sweep needs n_levels >= 2");
  if (grid.size() < 2) throw ConfigError("sweep grid needs at least 2 points");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ConfigError("sweep grid must be strictly ascending");
  }
  const SystemParams base = resolve_truncation(p.with_omega_q(grid[grid.size() / 2]), options.basis, n_levels);

  SweepResult out;
  out.omega_q_grid.assign(grid.begin(), grid.end());
  out.relative_levels.resize(static_cast<Index>(grid.size()), n_levels);
  out.n_max = base.n_max;
  out.basis = options.basis;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto levels = lowest_levels(base.with_omega_q(grid[i]), options.basis, n_levels, options.labels);
    const auto row = static_cast<Index>(i);
    for (int k = 0; k < n_levels; ++k) {
      out.relative_levels(row, k) = k == 0 ? 0.0 : levels.eigenvalues[k] - levels.eigenvalues[0];
    }
    if (options.labels) {
      std::vector<DominantLabel> labels;
      for (int k = 0; k < n_levels; ++k) labels.push_back(dominant_label(levels.state(k)));
      out.dominant_labels.push_back(std::move(labels));
    }
  }
  return out;
}

// ---- gap search -------------------------------------------------------------

double level_gap(const SystemParams& p, LevelPair pair, Basis basis) {
  const auto levels = lowest_levels(p, basis, pair.upper + 1, false);
  return levels.eigenvalues[pair.upper] - levels.eigenvalues[pair.lower];
}

AvoidedCrossing find_min_gap(const SystemParams& p, LevelPair pair, double lo, double hi,
                             const GapSearchOptions& options) {
  if (pair.lower < 0 || pair.upper <= pair.lower) throw ConfigError("level pair must satisfy 0 <= lower < upper");
  if (!(hi > lo)) throw ConfigError("gap bracket must satisfy lo < hi");
  if (options.coarse_points < 3) throw ConfigError("gap search needs at least 3 coarse points");
  const SystemParams base = resolve_truncation(p.with_omega_q(0.5 * (lo + hi)), options.basis, pair.upper + 1);
  const auto gap = [&](double wq) { return level_gap(base.with_omega_q(wq), pair, options.basis); };

  const int n = options.coarse_points;
  const double step = (hi - lo) / (n - 1);
  std::vector<double> xs(n), gs(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = lo + step * i;
    gs[i] = gap(xs[i]);
  }

  // Interior local minima, treating runs of numerically equal values as one point.
  const double flat = 1e-13 * std::max(1.0, *std::max_element(gs.begin(), gs.end()));
  std::vector<int> minima;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && std::abs(gs[j + 1] - gs[i]) <= flat) ++j;
    const bool left = i > 0 && gs[i - 1] > gs[i];
    const bool right = j + 1 < n && gs[j + 1] > gs[j];
    if (left && right) minima.push_back((i + j) / 2);
    i = j + 1;
  }
  if (minima.size() != 1) {
    throw BracketError("gap between levels " + std::to_string(pair.lower) + " and " + std::to_string(pair.upper) +
                       " has " + std::to_string(minima.size()) + " interior minima in [" + std::to_string(lo) +
                       ", " + std::to_string(hi) + "]; narrow or move the bracket");
  }

  // Golden-section refinement around the coarse minimum.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = xs[minima[0] - 1];
  double b = xs[minima[0] + 1];
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double gc = gap(c), gd = gap(d);
  double best_x = xs[minima[0]], best_g = gs[minima[0]];
  while (b - a > options.tolerance) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = gap(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = gap(d);
    }
    if (gc < best_g) best_g = gc, best_x = c;
    if (gd < best_g) best_g = gd, best_x = d;
  }
  const double mid = 0.5 * (a + b);
  const double g_mid = gap(mid);
  if (g_mid <= best_g) best_g = g_mid, best_x = mid;

  AvoidedCrossing out;
  out.omega_q_star = best_x;
  out.gap_min = best_g;
  out.omega_eff = best_g / 2.0;
  out.level_pair = pair;
  out.n_max = base.n_max;
  const auto labels_at = [&](double wq) {
    const auto levels = lowest_levels(base.with_omega_q(wq), options.basis, pair.upper + 1, true);
    return std::array<DominantLabel, 2>{dominant_label(levels.state(pair.lower)),
                                        dominant_label(levels.state(pair.upper))};
  };
  out.labels_below = labels_at(best_x - step);
  out.labels_above = labels_at(best_x + step);
  return out;
}

std::string to_string(CrossingKind kind) { return kind == CrossingKind::crossing ? "crossing" : "avoided"; }

CrossingKind classify_crossing(const AvoidedCrossing& result, double threshold) {
  return result.gap_min < threshold ? CrossingKind::crossing : CrossingKind::avoided;
}

CrossingKind classify_crossing(const SystemParams& p, LevelPair pair, double lo, double hi, double threshold,
                               const GapSearchOptions& options) {
  return classify_crossing(find_min_gap(p, pair, lo, hi, options), threshold);
}

// ---- identification ---------------------------------------------------------

std::vector<Overlap> identify_state(const QuantumState& state, std::span<const LabeledState> candidates) {
  std::vector<Overlap> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (std::abs(c.state.norm() - 1.0) > 1e-10) {
      throw ContractViolation("candidate '" + c.label + "' is not normalised");
    }
    out.push_back({c.label, std::norm(overlap(c.state, state))});
  }
  std::stable_sort(out.begin(), out.end(), [](const Overlap& a, const Overlap& b) { return a.weight > b.weight; });
  return out;
}

// ---- dressed frame ----------------------------------------------------------

QuantumState DressedFrame::dress(const QuantumState& state, double tolerance) const {
  if (!same_space(space, state.space())) throw ModeTypeError("state and dressed frame live on different spaces");
  const Eigen::VectorXcd a = bare.adjoint() * state.amplitudes();
  const double outside = (state.amplitudes() - bare * a).norm();
  if (outside > tolerance * std::max(1.0, state.norm())) {
    throw ConfigError("state has weight " + std::to_string(outside) +
                      " outside the dressed manifold (vacuum and single-photon states only)");
  }
  return QuantumState(space, dressed * a);
}

DressedFrame dressed_frame(const SystemParams& p, Basis basis, const EigenDecomposition& eig, double cluster_window) {
  const int N = p.n_cavities;
  const SpacePtr space = space_for(p, basis);
  if (!same_space(space, eig.space)) throw ModeTypeError("decomposition does not belong to these parameters");

  std::vector<std::vector<int>> occs;
  const auto qubits = [&](int a, int b) {
    std::vector<int> o(static_cast<std::size_t>(N + 2), 0);
    o[static_cast<std::size_t>(N)] = a;
    o[static_cast<std::size_t>(N + 1)] = b;
    return o;
  };
  occs.push_back(qubits(0, 0));
  for (int k = 0; k < N; ++k) {
    auto o = qubits(0, 0);
    o[static_cast<std::size_t>(k)] = 1;
    occs.push_back(o);
  }
  occs.push_back(qubits(1, 0));
  occs.push_back(qubits(0, 1));
  occs.push_back(qubits(1, 1));
  const auto m = static_cast<Index>(occs.size());
  if (eig.size() < m || eig.eigenvectors.cols() != eig.size()) {
    throw ContractViolation("dressed frame needs at least " + std::to_string(m) + " eigenvectors");
  }

  DressedFrame f;
  f.space = space;
  f.bare.resize(space->total_dim(), m);
  const SpacePtr label_space = supermode_space(p);
  for (Index k = 0; k < m; ++k) {
    const auto& o = occs[static_cast<std::size_t>(k)];
    f.bare.col(k) = prepare_state(p, basis, Basis::supermode, o).amplitudes();
    f.labels.push_back(label_space->format_state(label_space->flat_index(o)));
  }

  // Eigenstates carrying the most manifold weight; ties resolved towards lower energy.
  const Eigen::MatrixXcd overlaps = eig.eigenvectors.adjoint() * f.bare;
  const Eigen::VectorXd weight = overlaps.rowwise().squaredNorm();
  std::vector<Index> order(static_cast<std::size_t>(eig.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return weight[a] > weight[b] + 1e-12; });
  f.levels.assign(order.begin(), order.begin() + m);
  std::sort(f.levels.begin(), f.levels.end());

  // Eigenstates closer than the cluster window form one block; each label joins
  // the block of the eigenstate it is matched to by the best overall pairing.
  std::vector<int> block(static_cast<std::size_t>(m), 0);
  for (Index j = 1; j < m; ++j) {
    const double gap = eig.eigenvalues[f.levels[static_cast<std::size_t>(j)]] -
                       eig.eigenvalues[f.levels[static_cast<std::size_t>(j - 1)]];
    block[static_cast<std::size_t>(j)] = block[static_cast<std::size_t>(j - 1)] + (gap < cluster_window ? 0 : 1);
  }
  Eigen::MatrixXd w(m, m);  // [selected eigenstate, label]
  for (Index j = 0; j < m; ++j) w.row(j) = overlaps.row(f.levels[static_cast<std::size_t>(j)]).cwiseAbs2();
  std::vector<Index> perm(static_cast<std::size_t>(m)), best;
  std::iota(perm.begin(), perm.end(), Index{0});
  double best_score = -1.0;
  do {
    double score = 0.0;
    for (Index k = 0; k < m; ++k) score += w(perm[static_cast<std::size_t>(k)], k);
    if (score > best_score + 1e-12) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  f.dressed = Eigen::MatrixXcd::Zero(space->total_dim(), m);
  const int n_blocks = block.back() + 1;
  for (int b = 0; b < n_blocks; ++b) {
    std::vector<Index> rows, cols;
    for (Index j = 0; j < m; ++j) {
      if (block[static_cast<std::size_t>(j)] == b) rows.push_back(j);
    }
    for (Index k = 0; k < m; ++k) {
      if (block[static_cast<std::size_t>(best[static_cast<std::size_t>(k)])] == b) cols.push_back(k);
    }
    const auto nb = static_cast<Index>(rows.size());
    Eigen::MatrixXcd Vb(space->total_dim(), nb), Wb(nb, nb);
    for (Index r = 0; r < nb; ++r) {
      const Index level = f.levels[static_cast<std::size_t>(rows[static_cast<std::size_t>(r)])];
      Vb.col(r) = eig.eigenvectors.col(level);
      for (Index c = 0; c < nb; ++c) Wb(r, c) = overlaps(level, cols[static_cast<std::size_t>(c)]);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Wb, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues().minCoeff() < 1e-6) {
      throw ConvergenceError("labelled states are not resolved by the selected eigenstates");
    }
    const Eigen::MatrixXcd images = Vb * (svd.matrixU() * svd.matrixV().adjoint());
    for (Index c = 0; c < nb; ++c) f.dressed.col(cols[static_cast<std::size_t>(c)]) = images.col(c);
  }
  return f;
}

DressedFrame dressed_frame(const SystemParams& p, Basis basis, double cluster_window) {
  return dressed_frame(p, basis, diagonalize(p, basis), cluster_window);
}

// ---- convergence ------------------------------------------------------------

ConvergenceReport convergence_report(const SystemParams& p, std::span<const int> ladder, int n_levels, Basis basis) {
  if (ladder.empty()) throw ConfigError("convergence ladder is empty");
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    if (ladder[i] <= ladder[i - 1]) throw ConfigError("convergence ladder must be ascending");
  }
  ConvergenceReport r;
  r.ladder.assign(ladder.begin(), ladder.end());
  const auto rungs = static_cast<Index>(ladder.size());
  r.eigenvalues.resize(rungs, n_levels);
  for (Index k = 0; k < rungs; ++k) {
    r.eigenvalues.row(k) = lowest_levels(p.with_n_max(ladder[k]), basis, n_levels, false).eigenvalues.transpose();
  }
  r.drift = (r.eigenvalues.bottomRows(rungs - 1) - r.eigenvalues.topRows(rungs - 1)).cwiseAbs();
  return r;
}

}  // namespace uscqed
