#include "mpmlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpmlab {

LocallyFiniteMeasure::LocallyFiniteMeasure(std::vector<RateSegment> segments, std::vector<Atom> atoms,
                                           double horizon)
    : segments_(std::move(segments)), atoms_(std::move(atoms)), horizon_(horizon) {
  if (!(horizon_ > 0.0)) throw std::invalid_argument("LocallyFiniteMeasure: horizon must be positive");
  double prev = -1.0;
  for (const auto& s : segments_) {
    if (!(s.start > prev) || s.start < 0.0 || !(s.rate >= 0.0) || !std::isfinite(s.rate))
      throw std::invalid_argument("LocallyFiniteMeasure: rate segments must be increasing with finite nonnegative rates");
    prev = s.start;
  }
  prev = 0.0;
  for (const auto& a : atoms_) {
    if (!(a.time > prev)) throw std::invalid_argument("LocallyFiniteMeasure: atom times must be increasing and positive");
    if (!(a.mass > 0.0) || !std::isfinite(a.mass))
      throw std::invalid_argument("LocallyFiniteMeasure: atom masses must be positive");
    prev = a.time;
  }
}

LocallyFiniteMeasure LocallyFiniteMeasure::lebesgue(double rate, double horizon) {
  return {{{0.0, rate}}, {}, horizon};
}

LocallyFiniteMeasure LocallyFiniteMeasure::atomic(std::vector<Atom> atoms, double horizon) {
  return {{}, std::move(atoms), horizon};
}

LocallyFiniteMeasure LocallyFiniteMeasure::mixed(double rate, std::vector<Atom> atoms, double horizon) {
  return {{{0.0, rate}}, std::move(atoms), horizon};
}

LocallyFiniteMeasure LocallyFiniteMeasure::discretized_lebesgue(double rate, int n, std::vector<Atom> extra,
                                                                double horizon) {
  if (n < 1) throw std::invalid_argument("discretized_lebesgue: n must be positive");
  std::vector<Atom> atoms;
  const auto count = static_cast<long>(std::floor(n * horizon + 1e-9));
  std::size_t e = 0;
  for (long k = 1; k <= count; ++k) {
    const double t = static_cast<double>(k) / n;
    while (e < extra.size() && extra[e].time < t) atoms.push_back(extra[e++]);
    double mass = rate / n;
    if (e < extra.size() && extra[e].time == t) mass += extra[e++].mass;
    atoms.push_back({t, mass});
  }
  while (e < extra.size()) atoms.push_back(extra[e++]);
  return atomic(std::move(atoms), horizon);
}

double LocallyFiniteMeasure::rate_at(double t) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double x, const RateSegment& s) { return x < s.start; });
  return it == segments_.begin() ? 0.0 : std::prev(it)->rate;
}

double LocallyFiniteMeasure::ac_mass(double a, double b) const {
  if (!(b > a)) return 0.0;
  double m = 0.0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const double lo = std::max(a, segments_[i].start);
    const double hi = std::min(b, i + 1 < segments_.size() ? segments_[i + 1].start : INFINITY);
    if (hi > lo) m += segments_[i].rate * (hi - lo);
  }
  return m;
}

double LocallyFiniteMeasure::cdf(double t) const {
  double m = ac_mass(0.0, t);
  for (const auto& a : atoms_) {
    if (a.time > t) break;
    m += a.mass;
  }
  return m;
}

double LocallyFiniteMeasure::cdf_left(double t) const {
  double m = ac_mass(0.0, t);
  for (const auto& a : atoms_) {
    if (a.time >= t) break;
    m += a.mass;
  }
  return m;
}

double LocallyFiniteMeasure::atom_mass(double t) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), t,
                             [](const Atom& a, double x) { return a.time < x; });
  return it != atoms_.end() && it->time == t ? it->mass : 0.0;
}

double LocallyFiniteMeasure::atom_square_sum(double t) const {
  double s = 0.0;
  for (const auto& a : atoms_) {
    if (a.time > t) break;
    s += a.mass * a.mass;
  }
  return s;
}

double integrate_left(const CadlagPath& path, const LocallyFiniteMeasure& q, double t,
                      const std::function<double(std::span<const double>)>& g) {
  if (t > q.horizon() * (1.0 + 1e-12)) throw std::domain_error("integrate_left: t beyond measure horizon");
  if (t > path.horizon() * (1.0 + 1e-12)) throw std::domain_error("integrate_left: t beyond path horizon");
  double total = 0.0;
  const auto times = path.times();
  const std::size_t last = path.row_at(t);
  if (!q.segments().empty()) {
    double start = 0.0;
    for (std::size_t k = 0; k <= last; ++k) {
      const double end = k < last ? times[k] : t;
      const double m = q.ac_mass(start, end);
      if (m != 0.0) total += g(path.value(k)) * m;
      start = end;
    }
  }
  for (const auto& a : q.atoms()) {
    if (a.time > t) break;
    total += g(path.eval_left(a.time)) * a.mass;
  }
  return total;
}

double JumpControl::u_at(double t) const {
  auto it = std::lower_bound(u.begin(), u.end(), t, [](const Atom& a, double x) { return a.time < x; });
  return it != u.end() && it->time == t ? it->mass : 0.0;
}

JumpControl JumpControl::from_control_path(const CadlagPath& control, Kappa kappa, Vec x0) {
  JumpControl c{{}, kappa, std::move(x0)};
  for (const auto& j : control.jumps(control.horizon())) c.u.push_back({j.time, norm(j.delta)});
  return c;
}

}  // namespace mpmlab
