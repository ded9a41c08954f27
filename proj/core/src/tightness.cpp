#include "mpmlab/tightness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mpmlab/parallel.hpp"

namespace mpmlab {

ContainmentReport compact_containment(const SimOutput& ensemble, double T, double K, std::size_t threads) {
  const std::size_t n = ensemble.paths.size();
  if (n == 0) throw std::invalid_argument("compact_containment: empty ensemble");
  std::vector<double> inside(n);
  parallel_for(n, resolve_threads(threads),
               [&](std::size_t i) { inside[i] = ensemble.paths[i].running_sup(T) <= K ? 1.0 : 0.0; });
  ContainmentReport r;
  r.n = n;
  r.probability = pairwise_sum(inside) / static_cast<double>(n);
  r.std_error = std::sqrt(r.probability * (1.0 - r.probability) / static_cast<double>(n));
  return r;
}

std::vector<double> dyadic_grid(double T, int level, const LocallyFiniteMeasure* q) {
  if (!(T > 0.0) || level < 0) throw std::invalid_argument("dyadic_grid: need T > 0 and level >= 0");
  const double step = std::ldexp(1.0, -level);
  std::vector<double> out;
  for (long k = 1;; ++k) {
    const double t = static_cast<double>(k) * step;
    if (t > T) break;
    if (q != nullptr && q->atom_mass(t) > 0.0) continue;
    out.push_back(t);
  }
  return out;
}

MeasureConvergenceReport measure_j1_convergence(const std::vector<LocallyFiniteMeasure>& seq,
                                                const LocallyFiniteMeasure& Q, double T,
                                                const std::vector<double>& grid, double tolerance) {
  if (seq.empty()) throw std::invalid_argument("measure_j1_convergence: empty sequence");
  if (Q.horizon() < T) throw std::invalid_argument("measure_j1_convergence: Q horizon below T");
  std::vector<double> points;
  for (double t : grid)
    if (t > 0.0 && t <= T) points.push_back(t);
  points.push_back(T);

  MeasureConvergenceReport r;
  r.tolerance = tolerance;
  for (const auto& q : seq) {
    if (q.horizon() < T) throw std::invalid_argument("measure_j1_convergence: sequence horizon below T");
    double cdf_gap = 0.0;
    for (double t : points) cdf_gap = std::max(cdf_gap, std::abs(q.cdf(t) - Q.cdf(t)));
    r.cdf_gaps.push_back(cdf_gap);
    r.atom_square_gaps.push_back(std::abs(q.atom_square_sum(T) - Q.atom_square_sum(T)));
  }
  r.cdf_gap = r.cdf_gaps.back();
  r.atom_square_gap = r.atom_square_gaps.back();
  const auto nonincreasing = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] > v[i - 1] + 1e-15) return false;
    return true;
  };
  r.pass = r.cdf_gap < tolerance && r.atom_square_gap < tolerance && nonincreasing(r.cdf_gaps) &&
           nonincreasing(r.atom_square_gaps);
  return r;
}

std::optional<double> ball_exit_time(const CadlagPath& path, double K) {
  if (norm(path.initial_value()) > K) return 0.0;
  for (std::size_t k = 0; k < path.num_events(); ++k)
    if (norm(path.value(k + 1)) > K) return path.event_time(k);
  return std::nullopt;
}

std::vector<IncrementRow> conditional_increment_bound(const SimOutput& ensemble,
                                                      const std::function<double(std::span<const double>)>& f,
                                                      double C, const LocallyFiniteMeasure& q, double K,
                                                      const std::vector<std::pair<double, double>>& pairs,
                                                      std::size_t threads) {
  const std::size_t n = ensemble.paths.size();
  if (n == 0) throw std::invalid_argument("conditional_increment_bound: empty ensemble");
  std::vector<double> exit(n);
  parallel_for(n, resolve_threads(threads), [&](std::size_t i) {
    exit[i] = ball_exit_time(ensemble.paths[i], K).value_or(std::numeric_limits<double>::infinity());
  });
  std::vector<IncrementRow> rows;
  std::vector<double> sq(n);
  for (const auto& [s, t] : pairs) {
    if (!(s <= t)) throw std::invalid_argument("conditional_increment_bound: need s <= t");
    parallel_for(n, resolve_threads(threads), [&](std::size_t i) {
      const auto& p = ensemble.paths[i];
      const double d = f(p.eval(std::min(t, exit[i]))) - f(p.eval(std::min(s, exit[i])));
      sq[i] = d * d;
    });
    const MeanSe ms = mean_and_se(sq);
    IncrementRow row;
    row.s = s;
    row.t = t;
    row.lhs = ms.mean;
    row.std_error = ms.std_error;
    row.bound = C * (q.cdf(t) - q.cdf(s));
    row.flagged = row.lhs > row.bound + 3.0 * row.std_error;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mpmlab
