#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mpmlab/measure.hpp"
#include "mpmlab/paths.hpp"

namespace mpmlab {

struct J1Result {
  double distance = 0.0;
  /// Matched jump times (source in p1, target in p2) of the optimal time change.
  std::vector<std::pair<double, double>> witness_time_change;
};

/// Exact Skorokhod J1 distance on [0, T] between step paths:
///   inf over increasing bijections lambda of [0, T] of
///   max(sup |lambda(t) - t|, sup ||p1(t) - p2(lambda(t))||).
///
/// A time change of step paths is characterised, up to closure, by the
/// interleaving it induces between the two jump sequences: each jump is either
/// matched to a jump of the other path (lambda maps one time onto the other) or
/// ordered strictly before or after it. The distance is the minimax over all
/// such alignments of the time budget the interleaving requires and the largest
/// value gap visited along it, solved by dynamic programming on the grid of
/// (jumps of p1 consumed, jumps of p2 consumed).
J1Result j1_distance(const CadlagPath& p1, const CadlagPath& p2, double T);

/// sum_{T = 1 .. floor(H)} 2^-T min(1, j1_distance(p1, p2, T)).
double j1_distance_whole_line(const CadlagPath& p1, const CadlagPath& p2);

/// Nonnegative function of time that is zero off a countable spike set.
struct SpikeFunction {
  enum class Kind {
    finite,    ///< finitely many atoms (time, level)
    constant,  ///< k(t) = level for every t
    harmonic,  ///< k(t) = level on {1/k : k >= 1}, zero elsewhere
  };
  Kind kind = Kind::finite;
  std::vector<Atom> atoms;
  double level = 0.0;

  static SpikeFunction finite_atoms(std::vector<Atom> atoms) { return {Kind::finite, std::move(atoms), 0.0}; }
  static SpikeFunction constant(double c) { return {Kind::constant, {}, c}; }
  static SpikeFunction harmonic(double level = 1.0) { return {Kind::harmonic, {}, level}; }
};

/// True iff no t > 0 is an accumulation point of {s in [0, T] : k(s) >= a}.
bool k_admissible(const SpikeFunction& k, double T, double a);

/// True iff every jump on (0, T] satisfies
///   ||Delta omega(t)|| <= u(t) * kappa(sup_{s <= t} ||omega(s) - x0||).
bool in_control_set(const CadlagPath& path, const JumpControl& ctrl, double T);

struct CoincidenceOptions {
  double j1_tolerance = 1e-9;
  double uniform_tolerance = 1e-9;
  /// Skip the control-set precondition and only report the metrics.
  bool unconstrained = false;
};

struct CoincidenceReport {
  std::vector<double> j1_distances;
  std::vector<double> uniform_distances;
  /// Indices of sequence elements (and -1 for the limit) outside the control set.
  std::vector<int> precondition_violations;
  bool precondition_ok = true;
  /// Final j1 distance within tolerance implies final uniform distance within tolerance.
  bool coincide = false;
};

CoincidenceReport coincidence_check(const std::vector<CadlagPath>& sequence, const CadlagPath& limit,
                                    const JumpControl& ctrl, double T, const CoincidenceOptions& opts = {});

}  // namespace mpmlab
