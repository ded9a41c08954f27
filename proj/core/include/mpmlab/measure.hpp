#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mpmlab/paths.hpp"

namespace mpmlab {

struct Atom {
  double time;
  double mass;

  bool operator==(const Atom&) const = default;
};

/// Piece of the absolutely continuous part: density `rate` on [start, next start).
struct RateSegment {
  double start;
  double rate;

  bool operator==(const RateSegment&) const = default;
};

/// Locally finite measure on [0, horizon]: piecewise-constant Lebesgue
/// density plus finitely many atoms.
class LocallyFiniteMeasure {
 public:
  LocallyFiniteMeasure() = default;
  LocallyFiniteMeasure(std::vector<RateSegment> segments, std::vector<Atom> atoms, double horizon);

  static LocallyFiniteMeasure lebesgue(double rate, double horizon);
  static LocallyFiniteMeasure atomic(std::vector<Atom> atoms, double horizon);
  /// Lebesgue with the given rate plus atoms.
  static LocallyFiniteMeasure mixed(double rate, std::vector<Atom> atoms, double horizon);
  /// Atoms of mass rate / n at k / n, k = 1 .. floor(n * horizon), on top of `extra` atoms.
  static LocallyFiniteMeasure discretized_lebesgue(double rate, int n, std::vector<Atom> extra,
                                                   double horizon);

  double horizon() const { return horizon_; }
  const std::vector<RateSegment>& segments() const { return segments_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  double rate_at(double t) const;
  /// Lebesgue-density integral over [a, b].
  double ac_mass(double a, double b) const;
  /// Mass of [0, t].
  double cdf(double t) const;
  /// Mass of [0, t).
  double cdf_left(double t) const;
  double atom_mass(double t) const;
  /// Sum of squared atom masses over (0, t].
  double atom_square_sum(double t) const;

  bool operator==(const LocallyFiniteMeasure&) const = default;

 private:
  std::vector<RateSegment> segments_;
  std::vector<Atom> atoms_;
  double horizon_ = 0.0;
};

/// int_0^t g(omega(s-)) q(ds) for a step path: exact on the constancy
/// pieces of the path against the Lebesgue part, plus atom sums.
double integrate_left(const CadlagPath& path, const LocallyFiniteMeasure& q, double t,
                      const std::function<double(std::span<const double>)>& g);

/// Increasing continuous kappa for jump-control sets.
struct Kappa {
  enum class Kind { constant, affine };
  Kind kind = Kind::constant;
  double a = 1.0;  ///< constant level or intercept
  double b = 0.0;  ///< slope (affine only)

  static Kappa constant(double c) { return {Kind::constant, c, 0.0}; }
  static Kappa affine(double a, double b) { return {Kind::affine, a, b}; }
  double operator()(double x) const { return kind == Kind::constant ? a : a + b * x; }
};

/// Jump-size control u(t) * kappa(sup_{s<=t} ||omega(s) - x0||); u is zero
/// away from its atoms.
struct JumpControl {
  std::vector<Atom> u;  ///< (time, level), strictly increasing times
  Kappa kappa;
  Vec x0;

  double u_at(double t) const;
  /// Control from a nondecreasing control path L: u(t) = ||Delta L(t)||.
  static JumpControl from_control_path(const CadlagPath& control, Kappa kappa, Vec x0);
};

}  // namespace mpmlab
