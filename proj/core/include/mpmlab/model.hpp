#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mpmlab/measure.hpp"
#include "mpmlab/paths.hpp"

namespace mpmlab {

/// Finitely supported jump-size law. Zero-size atoms are allowed and mean
/// "no jump".
struct JumpLaw {
  std::vector<Vec> sizes;
  std::vector<double> probs;

  static JumpLaw point(Vec size) { return {{std::move(size)}, {1.0}}; }
  /// +a and -a with probability 1/2 each (1-d).
  static JumpLaw symmetric(double a) { return {{Vec{a}, Vec{-a}}, {0.5, 0.5}}; }

  std::size_t dim() const { return sizes.empty() ? 0 : sizes.front().size(); }

  template <typename Fn>
  double expect(Fn&& fn) const {
    double s = 0.0;
    for (std::size_t k = 0; k < sizes.size(); ++k) s += probs[k] * fn(std::span<const double>(sizes[k]));
    return s;
  }
};

using StateFn = std::function<Vec(double, std::span<const double>)>;
using RateFn = std::function<double(double, std::span<const double>)>;
using LawFn = std::function<JumpLaw(double, std::span<const double>)>;

/// Jump at a fixed time whose size law depends on the left limit of the state.
struct ScheduledJump {
  double time;
  std::function<JumpLaw(std::span<const double>)> law;
};

/// Finite-activity jump diffusion
///
///   dX = drift(t, X) dt + diffusion(t, X) dW + dJ,
///
/// where J jumps at rate intensity(t, X-) with sizes from jump_law(t, X-), and
/// additionally at every scheduled time with sizes from that entry's law.
/// Relative to the truncation h the semimartingale characteristics are
///
///   B = int (drift + intensity E[h(J)]) dt + sum_{scheduled s} E[h(J_s)],
///   C = int diffusion diffusion^T dt,
///   nu(dt, dx) = intensity F(dx) dt + sum_{scheduled s} delta_s(dt) F_s(dx),
///
/// i.e. the base measure dA is Lebesgue plus a unit atom at each scheduled time.
/// Empty callbacks mean zero.
struct CharModel {
  std::string name;
  std::size_t dim = 1;
  std::size_t noise_dim = 1;
  StateFn drift;
  StateFn diffusion;  ///< dim x noise_dim, row-major
  RateFn intensity;
  LawFn jump_law;
  std::vector<ScheduledJump> scheduled;
  TruncationSpec truncation;

  bool has_random_jumps() const { return static_cast<bool>(intensity); }
  LocallyFiniteMeasure base_measure(double horizon) const;

  Vec drift_at(double t, std::span<const double> x) const;
  Vec diffusion_at(double t, std::span<const double> x) const;
  double intensity_at(double t, std::span<const double> x) const;
};

/// Scalar Brownian motion with drift `mu` and volatility `sigma`.
CharModel brownian_model(double mu = 0.0, double sigma = 1.0);
/// Compound Poisson with constant rate and a state-independent law.
CharModel compound_poisson_model(double rate, JumpLaw law, double radius = 1.0);
/// Pure scheduled jumps at fixed times with state-independent laws.
CharModel scheduled_jump_model(std::vector<std::pair<double, JumpLaw>> atoms, double radius = 1.0);

}  // namespace mpmlab
