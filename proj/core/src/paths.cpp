#include "mpmlab/paths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mpmlab {

namespace {

// Slack for times computed as k * step that land a rounding error past the horizon.
double time_slack(double horizon) { return 1e-12 * std::max(1.0, horizon); }

}  // namespace

double norm(std::span<const double> v) {
  if (v.size() == 1) return std::abs(v[0]);
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("distance: dimension mismatch");
  if (a.size() == 1) return std::abs(a[0] - b[0]);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

CadlagPath::CadlagPath(Vec initial_value, double horizon)
    : dim_(initial_value.size()), horizon_(horizon), values_(std::move(initial_value)) {
  validate();
}

CadlagPath::CadlagPath(std::size_t dim, std::vector<double> times, std::vector<double> values,
                       double horizon)
    : dim_(dim), horizon_(horizon), times_(std::move(times)), values_(std::move(values)) {
  validate();
}

CadlagPath CadlagPath::constant(double value, double horizon) { return {Vec{value}, horizon}; }

CadlagPath CadlagPath::scalar_steps(double initial,
                                    std::span<const std::pair<double, double>> events,
                                    double horizon) {
  std::vector<double> times;
  std::vector<double> values{initial};
  for (auto [t, v] : events) {
    times.push_back(t);
    values.push_back(v);
  }
  return {1, std::move(times), std::move(values), horizon};
}

CadlagPath CadlagPath::indicator(double jump_time, double horizon) {
  return {1, {jump_time}, {0.0, 1.0}, horizon};
}

void CadlagPath::validate() const {
  if (dim_ == 0) throw std::invalid_argument("CadlagPath: dimension must be positive");
  if (!(horizon_ > 0.0)) throw std::invalid_argument("CadlagPath: horizon must be positive");
  if (values_.size() != (times_.size() + 1) * dim_)
    throw std::invalid_argument("CadlagPath: value table does not match event count");
  double prev = 0.0;
  for (double t : times_) {
    if (!(t > prev)) throw std::invalid_argument("CadlagPath: event times must be increasing in (0, horizon]");
    prev = t;
  }
  if (prev > horizon_ + time_slack(horizon_))
    throw std::invalid_argument("CadlagPath: event after horizon");
}

std::size_t CadlagPath::row_at(double t) const {
  return static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
}

std::size_t CadlagPath::row_before(double t) const {
  return static_cast<std::size_t>(std::lower_bound(times_.begin(), times_.end(), t) - times_.begin());
}

std::span<const double> CadlagPath::eval(double t) const {
  if (t < 0.0 || t > horizon_ + time_slack(horizon_))
    throw std::domain_error("eval: t = " + std::to_string(t) + " outside [0, horizon]");
  return value(row_at(t));
}

std::span<const double> CadlagPath::eval_left(double t) const {
  if (t <= 0.0 || t > horizon_ + time_slack(horizon_))
    throw std::domain_error("eval_left: t = " + std::to_string(t) + " outside (0, horizon]");
  return value(row_before(t));
}

std::vector<Jump> CadlagPath::jumps(double T) const {
  if (T > horizon_ + time_slack(horizon_)) throw std::domain_error("jumps: T beyond horizon");
  std::vector<Jump> out;
  const std::size_t last = row_at(T);
  for (std::size_t k = 1; k <= last; ++k) {
    auto prev = value(k - 1);
    auto cur = value(k);
    Vec delta(dim_);
    bool nonzero = false;
    for (std::size_t i = 0; i < dim_; ++i) {
      delta[i] = cur[i] - prev[i];
      nonzero = nonzero || delta[i] != 0.0;
    }
    if (nonzero) out.push_back({times_[k - 1], std::move(delta)});
  }
  return out;
}

double CadlagPath::running_sup(double t, std::span<const double> ref) const {
  const std::size_t last = row_at(t);
  double s = 0.0;
  for (std::size_t k = 0; k <= last; ++k) {
    s = std::max(s, ref.empty() ? norm(value(k)) : distance(value(k), ref));
  }
  return s;
}

CadlagPath CadlagPath::truncated(double T) const {
  const std::size_t last = row_at(T);
  std::vector<double> times(times_.begin(), times_.begin() + static_cast<std::ptrdiff_t>(last));
  std::vector<double> values(values_.begin(),
                             values_.begin() + static_cast<std::ptrdiff_t>((last + 1) * dim_));
  return {dim_, std::move(times), std::move(values), T};
}

CadlagPath CadlagPath::canonical() const {
  PathBuilder b(initial_value(), horizon_);
  for (std::size_t k = 1; k <= times_.size(); ++k) {
    auto v = value(k);
    if (!std::equal(v.begin(), v.end(), b.current().begin())) b.push(times_[k - 1], v);
  }
  return std::move(b).build();
}

PathBuilder::PathBuilder(std::span<const double> initial_value, double horizon)
    : dim_(initial_value.size()), horizon_(horizon), values_(initial_value.begin(), initial_value.end()) {}

PathBuilder::PathBuilder(double initial_value, double horizon)
    : dim_(1), horizon_(horizon), values_{initial_value} {}

void PathBuilder::reserve(std::size_t events) {
  times_.reserve(events);
  values_.reserve((events + 1) * dim_);
}

void PathBuilder::push(double time, std::span<const double> value) {
  if (value.size() != dim_) throw std::invalid_argument("PathBuilder: dimension mismatch");
  if (!(time > last_time())) throw std::invalid_argument("PathBuilder: non-increasing event time");
  times_.push_back(time);
  values_.insert(values_.end(), value.begin(), value.end());
}

void PathBuilder::push(double time, double value) { push(time, std::span<const double>(&value, 1)); }

CadlagPath PathBuilder::build() && {
  return {dim_, std::move(times_), std::move(values_), horizon_};
}

double uniform_distance(const CadlagPath& p1, const CadlagPath& p2, double T) {
  if (p1.dim() != p2.dim()) throw std::invalid_argument("uniform_distance: dimension mismatch");
  const double slack = time_slack(T);
  if (p1.horizon() + slack < T || p2.horizon() + slack < T)
    throw std::domain_error("uniform_distance: T beyond horizon");
  // Merge the two event grids; both paths are constant between merged points.
  double d = distance(p1.initial_value(), p2.initial_value());
  std::size_t i = 0;
  std::size_t j = 0;
  const auto t1 = p1.times();
  const auto t2 = p2.times();
  while (true) {
    const double a = i < t1.size() ? t1[i] : INFINITY;
    const double b = j < t2.size() ? t2[j] : INFINITY;
    const double next = std::min(a, b);
    if (!(next <= T)) break;
    if (a == next) ++i;
    if (b == next) ++j;
    d = std::max(d, distance(p1.value(i), p2.value(j)));
  }
  return d;
}

Vec TruncationSpec::apply(std::span<const double> x) const {
  const double n = norm(x);
  const double scale = n > radius ? radius / n : 1.0;
  Vec out(x.begin(), x.end());
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace mpmlab
