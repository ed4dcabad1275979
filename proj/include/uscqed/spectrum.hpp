#pragma once
// Level sweeps against the qubit frequency, avoided-crossing search and
// eigenstate identification.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "uscqed/model.hpp"

namespace uscqed {

/// Lowest `count` eigenpairs of the system Hamiltonian in `basis`. Mirror
/// symmetric parameter sets are solved block by block.
EigenDecomposition lowest_levels(const SystemParams& p, Basis basis, Index count, bool vectors = true);
/// Full eigendecomposition, same conventions as eig_hermitian.
EigenDecomposition diagonalize(const SystemParams& p, Basis basis);

struct DominantLabel {
  std::string label;  // e.g. "1,0,g,g", leftmost mode first
  double weight = 0.0;
  Index index = 0;
};

DominantLabel dominant_label(const QuantumState& state);

struct SweepOptions {
  Basis basis = Basis::supermode;
  bool labels = true;
};

struct SweepResult {
  std::vector<double> omega_q_grid;
  Eigen::MatrixXd relative_levels;  // [point, level], column 0 is zero
  std::vector<std::vector<DominantLabel>> dominant_labels;  // [point][level], empty without labels
  int n_max = 0;
  Basis basis = Basis::supermode;
};

/// Throws ConfigError for a non-ascending grid or n_levels < 2, ConvergenceError
/// when automatic truncation runs out of the dimension guard.
SweepResult sweep_levels(const SystemParams& p, std::span<const double> grid, int n_levels,
                         const SweepOptions& options = {});

struct LevelPair {
  int lower = 0;
  int upper = 1;
};

struct GapSearchOptions {
  Basis basis = Basis::supermode;
  int coarse_points = 201;
  double tolerance = 1e-6;  // final bracket width in omega_q
};

struct AvoidedCrossing {
  double omega_q_star = 0.0;
  double gap_min = 0.0;
  double omega_eff = 0.0;  // gap_min / 2
  LevelPair level_pair;
  std::array<DominantLabel, 2> labels_below;  // levels (lower, upper) one coarse step below omega_q_star
  std::array<DominantLabel, 2> labels_above;
  int n_max = 0;
};

/// Gap w_upper - w_lower at the parameters as given.
double level_gap(const SystemParams& p, LevelPair pair, Basis basis);

/// Coarse scan then golden-section refinement of the gap minimum in
/// [lo, hi]. Throws BracketError unless the scan shows exactly one interior
/// local minimum.
AvoidedCrossing find_min_gap(const SystemParams& p, LevelPair pair, double lo, double hi,
                             const GapSearchOptions& options = {});

enum class CrossingKind { crossing, avoided };

inline constexpr double kCrossingThreshold = 1e-5;

std::string to_string(CrossingKind kind);
CrossingKind classify_crossing(const AvoidedCrossing& result, double threshold = kCrossingThreshold);
CrossingKind classify_crossing(const SystemParams& p, LevelPair pair, double lo, double hi,
                               double threshold = kCrossingThreshold, const GapSearchOptions& options = {});

struct LabeledState {
  std::string label;
  QuantumState state;
};

struct Overlap {
  std::string label;
  double weight = 0.0;  // |<candidate|state>|^2
};

/// Candidates ranked by weight, descending. Throws ModeTypeError on a space
/// mismatch and ContractViolation for an unnormalised candidate.
std::vector<Overlap> identify_state(const QuantumState& state, std::span<const LabeledState> candidates);

/// Dressed counterparts of the low-lying labelled states: the photon vacuum
/// with every qubit configuration and one photon in each normal mode. The
/// eigenstates carrying most of that manifold are grouped into clusters of
/// near-degenerate levels; within each cluster the dressed states are the
/// closest orthonormal set (polar factor) to the projected labelled states.
/// A hybridised doublet thus yields (|E_a> +- |E_b>)/sqrt(2)-like images.
struct DressedFrame {
  SpacePtr space;
  std::vector<std::string> labels;  // normal-mode occupations, e.g. "1,0,g,g"
  Eigen::MatrixXcd bare;            // columns: labelled states on `space`
  Eigen::MatrixXcd dressed;         // columns: dressed counterparts
  std::vector<Index> levels;        // eigenstates spanning the dressed manifold, ascending

  /// Linear image of a state inside the span of `bare`; throws ConfigError
  /// when more than `tolerance` of its norm lies outside.
  QuantumState dress(const QuantumState& state, double tolerance = 1e-9) const;
};

inline constexpr double kDressedClusterWindow = 0.05;

/// `eig` must be a full decomposition on the space of (p, basis).
DressedFrame dressed_frame(const SystemParams& p, Basis basis, const EigenDecomposition& eig,
                           double cluster_window = kDressedClusterWindow);
DressedFrame dressed_frame(const SystemParams& p, Basis basis, double cluster_window = kDressedClusterWindow);

struct ConvergenceReport {
  std::vector<int> ladder;
  Eigen::MatrixXd eigenvalues;  // [rung, level]
  Eigen::MatrixXd drift;        // [rung - 1, level] = |lambda(rung) - lambda(rung - 1)|
};

ConvergenceReport convergence_report(const SystemParams& p, std::span<const int> ladder, int n_levels = 7,
                                     Basis basis = Basis::supermode);

/// Smallest n_max (from `start` upward) at which the lowest `n_levels`
/// eigenvalues move by less than `tolerance` on the next increment.
int resolve_n_max(const SystemParams& p, Basis basis, int n_levels, double tolerance = 1e-8, int start = 2,
                  Index guard = kDefaultDimensionGuard);

/// p with auto truncation resolved (unchanged when auto_n_max is off).
SystemParams resolve_truncation(const SystemParams& p, Basis basis, int n_levels);

}  // namespace uscqed
