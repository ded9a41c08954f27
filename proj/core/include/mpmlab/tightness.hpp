#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mpmlab/measure.hpp"
#include "mpmlab/paths.hpp"
#include "mpmlab/simulate.hpp"

namespace mpmlab {

struct ContainmentReport {
  double probability = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Empirical P(sup_{t <= T} ||X_t|| <= K) with binomial SE.
ContainmentReport compact_containment(const SimOutput& ensemble, double T, double K, std::size_t threads = 0);

/// Dyadic points k 2^-level in (0, T] that are not atoms of q.
std::vector<double> dyadic_grid(double T, int level, const LocallyFiniteMeasure* q = nullptr);

struct MeasureConvergenceReport {
  std::vector<double> cdf_gaps;          ///< per sequence element
  std::vector<double> atom_square_gaps;  ///< per sequence element
  double cdf_gap = 0.0;                  ///< last element
  double atom_square_gap = 0.0;          ///< last element
  double tolerance = 0.0;
  bool pass = false;
};

/// For each q^n: max over the grid (and T) of |q^n([0,t]) - Q([0,t])|, and
/// |sum_{0<s<=T} q^n({s})^2 - sum_{0<s<=T} Q({s})^2|. Passes when both gaps of
/// the last element are below `tolerance` and neither sequence increases.
MeasureConvergenceReport measure_j1_convergence(const std::vector<LocallyFiniteMeasure>& seq,
                                                const LocallyFiniteMeasure& Q, double T,
                                                const std::vector<double>& grid, double tolerance = 1e-2);

/// inf{t : ||X_t|| > K}; nullopt when the path stays in the ball.
std::optional<double> ball_exit_time(const CadlagPath& path, double K);

struct IncrementRow {
  double s = 0.0;
  double t = 0.0;
  double lhs = 0.0;  ///< mean of (f(X_{t^T_K}) - f(X_{s^T_K}))^2
  double std_error = 0.0;
  double bound = 0.0;  ///< C (q([0,t]) - q([0,s]))
  bool flagged = false;
};

/// Second-moment increment check against C * q((s, t]); flagged when lhs
/// exceeds the bound by more than 3 SE.
std::vector<IncrementRow> conditional_increment_bound(const SimOutput& ensemble,
                                                      const std::function<double(std::span<const double>)>& f,
                                                      double C, const LocallyFiniteMeasure& q, double K,
                                                      const std::vector<std::pair<double, double>>& pairs,
                                                      std::size_t threads = 0);

}  // namespace mpmlab
