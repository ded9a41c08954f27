#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mpmlab {

using Vec = std::vector<double>;

double norm(std::span<const double> v);
double distance(std::span<const double> a, std::span<const double> b);

struct Jump {
  double time;
  Vec delta;
};

/// Piecewise-constant right-continuous path on [0, horizon].
///
/// Storage is flat: value row 0 is the initial value, row k (k >= 1) is the
/// value taken at event k - 1. Event times are strictly increasing and lie in
/// (0, horizon]. Instances are immutable; use PathBuilder to assemble one.
class CadlagPath {
 public:
  CadlagPath() = default;
  CadlagPath(Vec initial_value, double horizon);
  CadlagPath(std::size_t dim, std::vector<double> times, std::vector<double> values,
             double horizon);

  static CadlagPath constant(double value, double horizon);
  /// 1-d step path from (time, value) pairs.
  static CadlagPath scalar_steps(double initial, std::span<const std::pair<double, double>> events,
                                 double horizon);
  /// 1_{[jump_time, inf)} on [0, horizon].
  static CadlagPath indicator(double jump_time, double horizon);

  std::size_t dim() const { return dim_; }
  double horizon() const { return horizon_; }
  std::size_t num_events() const { return times_.size(); }
  std::span<const double> times() const { return times_; }
  double event_time(std::size_t k) const { return times_[k]; }

  /// Row k of the value table; k = 0 is the initial value.
  std::span<const double> value(std::size_t k) const {
    return {values_.data() + k * dim_, dim_};
  }
  std::span<const double> initial_value() const { return value(0); }
  std::span<const double> terminal_value() const { return value(times_.size()); }

  /// Number of events at or before t, i.e. the value row active at t.
  std::size_t row_at(double t) const;
  /// Number of events strictly before t, i.e. the value row active at t-.
  std::size_t row_before(double t) const;

  std::span<const double> eval(double t) const;
  std::span<const double> eval_left(double t) const;
  double eval1(double t) const { return eval(t)[0]; }

  /// Nonzero jumps on (0, T].
  std::vector<Jump> jumps(double T) const;

  /// sup_{s <= t} ||omega(s) - ref||, ref = 0 when empty.
  double running_sup(double t, std::span<const double> ref = {}) const;

  /// Restriction to [0, T] with horizon T.
  CadlagPath truncated(double T) const;
  /// Same event times with zero-jump events removed.
  CadlagPath canonical() const;

  bool operator==(const CadlagPath&) const = default;

 private:
  void validate() const;

  std::size_t dim_ = 1;
  double horizon_ = 0.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// Incremental construction of a CadlagPath in time order.
class PathBuilder {
 public:
  PathBuilder(std::span<const double> initial_value, double horizon);
  PathBuilder(double initial_value, double horizon);

  void reserve(std::size_t events);
  /// Appends an event; time must exceed the previous event time.
  void push(double time, std::span<const double> value);
  void push(double time, double value);
  std::span<const double> current() const {
    return {values_.data() + values_.size() - dim_, dim_};
  }
  double last_time() const { return times_.empty() ? 0.0 : times_.back(); }
  CadlagPath build() &&;

 private:
  std::size_t dim_;
  double horizon_;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// sup over [0, T] of ||p1(t) - p2(t)||.
double uniform_distance(const CadlagPath& p1, const CadlagPath& p2, double T);

/// Continuous radial clip h(x) = x * min(1, radius / ||x||).
struct TruncationSpec {
  double radius = 1.0;

  Vec apply(std::span<const double> x) const;
};

}  // namespace mpmlab
