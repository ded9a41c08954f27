#include "mpmlab/skorokhod.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace mpmlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum Move : std::uint8_t { kNone = 0, kMatch = 1, kStepFirst = 2, kStepSecond = 3 };

// Jump times in (0, T] of the canonical path together with the value rows.
struct JumpSkeleton {
  std::vector<double> times;
  std::vector<std::span<const double>> values;  // values[0] initial, values[k] after jump k
};

JumpSkeleton skeleton(const CadlagPath& p, double T) {
  JumpSkeleton s;
  s.values.push_back(p.initial_value());
  const std::size_t last = p.row_at(T);
  for (std::size_t k = 1; k <= last; ++k) {
    auto v = p.value(k);
    if (!std::equal(v.begin(), v.end(), s.values.back().begin())) {
      s.times.push_back(p.event_time(k - 1));
      s.values.push_back(v);
    }
  }
  return s;
}

}  // namespace

J1Result j1_distance(const CadlagPath& p1, const CadlagPath& p2, double T) {
  if (p1.dim() != p2.dim()) throw std::invalid_argument("j1_distance: dimension mismatch");
  if (!(T > 0.0)) throw std::domain_error("j1_distance: T must be positive");
  const double slack = 1e-12 * std::max(1.0, T);
  if (p1.horizon() + slack < T || p2.horizon() + slack < T)
    throw std::domain_error("j1_distance: T beyond horizon");

  const JumpSkeleton a = skeleton(p1, T);
  const JumpSkeleton b = skeleton(p2, T);
  const std::size_t n = a.times.size();
  const std::size_t m = b.times.size();
  // Jumps sitting at T are pinned there by lambda(T) = T.
  auto before_end = [T](double t) { return t < T; };

  // cost(i, j): best minimax over alignments reaching state (i, j).
  std::vector<double> prev_row(m + 1, kInf);
  std::vector<double> row(m + 1, kInf);
  std::vector<std::uint8_t> moves((n + 1) * (m + 1), kNone);

  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= m; ++j) {
      const double gap = distance(a.values[i], b.values[j]);
      if (i == 0 && j == 0) {
        row[0] = gap;
        continue;
      }
      double best = kInf;
      std::uint8_t move = kNone;
      if (i > 0 && j > 0) {
        const double ti = a.times[i - 1];
        const double sj = b.times[j - 1];
        if (before_end(ti) == before_end(sj)) {
          const double c = std::max(prev_row[j - 1], std::abs(ti - sj));
          if (c < best) {
            best = c;
            move = kMatch;
          }
        }
      }
      if (i > 0) {
        // Jump i of p1 placed after jumps 1..j and before jump j+1 of p2.
        const double ti = a.times[i - 1];
        double c = prev_row[j];
        if (j > 0) c = before_end(b.times[j - 1]) ? std::max(c, b.times[j - 1] - ti) : kInf;
        if (j < m) c = before_end(ti) ? std::max(c, ti - b.times[j]) : kInf;
        if (c < best) {
          best = c;
          move = kStepFirst;
        }
      }
      if (j > 0) {
        const double sj = b.times[j - 1];
        double c = row[j - 1];
        if (i > 0) c = before_end(a.times[i - 1]) ? std::max(c, a.times[i - 1] - sj) : kInf;
        if (i < n) c = before_end(sj) ? std::max(c, sj - a.times[i]) : kInf;
        if (c < best) {
          best = c;
          move = kStepSecond;
        }
      }
      row[j] = std::max(best, gap);
      moves[i * (m + 1) + j] = move;
    }
    std::swap(prev_row, row);
  }

  J1Result result;
  result.distance = std::max(0.0, prev_row[m]);
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    switch (moves[i * (m + 1) + j]) {
      case kMatch:
        result.witness_time_change.emplace_back(a.times[i - 1], b.times[j - 1]);
        --i;
        --j;
        break;
      case kStepFirst:
        --i;
        break;
      case kStepSecond:
        --j;
        break;
      default:
        throw std::logic_error("j1_distance: broken alignment table");
    }
  }
  std::reverse(result.witness_time_change.begin(), result.witness_time_change.end());

  // The identity alignment is always feasible, so this only trims rounding.
  result.distance = std::min(result.distance, uniform_distance(p1, p2, T));
  return result;
}

double j1_distance_whole_line(const CadlagPath& p1, const CadlagPath& p2) {
  if (p1.horizon() != p2.horizon()) throw std::invalid_argument("j1_distance_whole_line: horizons differ");
  const auto last = static_cast<int>(std::floor(p1.horizon()));
  double total = 0.0;
  for (int T = 1; T <= last; ++T) {
    total += std::ldexp(1.0, -T) * std::min(1.0, j1_distance(p1, p2, T).distance);
  }
  return total;
}

bool k_admissible(const SpikeFunction& k, double /*T*/, double a) {
  switch (k.kind) {
    case SpikeFunction::Kind::finite:
      return true;
    case SpikeFunction::Kind::constant:
      // {k >= a} is the whole interval when a <= level, empty otherwise.
      return a > k.level;
    case SpikeFunction::Kind::harmonic:
      // {1/k} only accumulates at 0.
      return true;
  }
  return false;
}

bool in_control_set(const CadlagPath& path, const JumpControl& ctrl, double T) {
  if (!ctrl.x0.empty() && ctrl.x0.size() != path.dim())
    throw std::invalid_argument("in_control_set: reference point dimension mismatch");
  const std::size_t last = path.row_at(T);
  auto radial = [&](std::span<const double> v) { return ctrl.x0.empty() ? norm(v) : distance(v, ctrl.x0); };
  double running = radial(path.value(0));
  for (std::size_t k = 1; k <= last; ++k) {
    running = std::max(running, radial(path.value(k)));
    const double jump = distance(path.value(k), path.value(k - 1));
    if (jump == 0.0) continue;
    const double bound = ctrl.u_at(path.event_time(k - 1)) * ctrl.kappa(running);
    if (jump > bound + 1e-12 * std::max(jump, bound)) return false;
  }
  return true;
}

CoincidenceReport coincidence_check(const std::vector<CadlagPath>& sequence, const CadlagPath& limit,
                                    const JumpControl& ctrl, double T, const CoincidenceOptions& opts) {
  CoincidenceReport rep;
  if (!in_control_set(limit, ctrl, T)) rep.precondition_violations.push_back(-1);
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    if (!in_control_set(sequence[k], ctrl, T)) rep.precondition_violations.push_back(static_cast<int>(k));
    rep.j1_distances.push_back(j1_distance(sequence[k], limit, T).distance);
    rep.uniform_distances.push_back(uniform_distance(sequence[k], limit, T));
  }
  rep.precondition_ok = rep.precondition_violations.empty();
  if (!rep.precondition_ok && !opts.unconstrained) {
    rep.coincide = false;
    return rep;
  }
  if (sequence.empty()) {
    rep.coincide = true;
    return rep;
  }
  const bool j1_small = rep.j1_distances.back() <= opts.j1_tolerance;
  const bool uniform_small = rep.uniform_distances.back() <= opts.uniform_tolerance;
  rep.coincide = !j1_small || uniform_small;
  return rep;
}

}  // namespace mpmlab
