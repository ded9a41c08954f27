#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "mpmlab/measure.hpp"
#include "mpmlab/model.hpp"
#include "mpmlab/paths.hpp"
#include "mpmlab/random.hpp"

namespace mpmlab {

struct EnsembleConfig {
  std::size_t n_paths = 1;
  double grid_step = 0.01;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  /// Point-mass initial law; ignored when `initial_sampler` is set.
  Vec initial{0.0};
  std::function<Vec(RandomStream&)> initial_sampler;
  /// 0 = resolve from MPMLAB_THREADS / hardware.
  std::size_t threads = 0;

  /// Number of grid steps; throws when grid_step does not divide horizon.
  std::size_t steps() const;
  double grid_time(std::size_t k) const;
};

struct SimOutput {
  std::vector<CadlagPath> paths;
  /// Control paths L^n, one per path, when the simulator builds them.
  std::optional<std::vector<CadlagPath>> controls;
  /// Driving semimartingale Z of a Volterra pair, one per path.
  std::vector<CadlagPath> drivers;
  /// Generating model; its characteristics along each path are the
  /// pre-limit characteristics of that path.
  std::shared_ptr<const CharModel> model;
  double grid_step = 0.0;
  double horizon = 0.0;

  std::size_t size() const { return paths.size(); }
};

/// Euler-Maruyama skeleton of a jump-free model; an event at every grid point.
SimOutput simulate_ito(std::shared_ptr<const CharModel> model, const EnsembleConfig& cfg);

/// Euler scheme with at most one random jump per grid step (probability
/// intensity * grid_step, applied at the step's right end) and scheduled jumps
/// inserted at exactly their times. Also emits control paths L whose jumps
/// dominate the path's: ||Delta X_t|| <= Delta L_t (1 + sup_{s<=t} ||X_s||).
SimOutput simulate_jump_diffusion(std::shared_ptr<const CharModel> model, const EnsembleConfig& cfg);

/// Dominating control for simulate_jump_diffusion output: u = ||Delta L||, kappa(x) = 1 + x.
JumpControl control_from_path(const CadlagPath& control, std::size_t dim);

/// Finite-state chain on {0, .., m-1} whose compensator of f(X) is
/// int (Lambda f)(X_{s-}) q(ds): exponential clocks against the Lebesgue part
/// of q, one step of I + Lambda q({t}) at each atom t.
SimOutput simulate_ek_ftd_chain(std::size_t states, const std::vector<double>& generator,
                                const LocallyFiniteMeasure& q, const EnsembleConfig& cfg);

/// Volterra pair (X, Z) with X_t = g0(t) + int_0^t K_{t-s} dZ_s and Z a
/// finite-activity semimartingale with characteristics driven by X.
struct VolterraModel {
  std::size_t dim_x = 1;
  std::size_t dim_z = 1;
  std::vector<Vec> g0;      ///< g0 at grid points 0..N, each of size dim_x
  std::vector<Vec> kernel;  ///< K at lags 0..N, each dim_x x dim_z row-major
  std::function<Vec(std::span<const double>)> drift;        ///< b(x), size dim_z
  std::function<Vec(std::span<const double>)> covariance;   ///< a(x), dim_z x dim_z
  std::function<double(std::span<const double>)> intensity;
  std::function<JumpLaw(std::span<const double>)> jump_law;
};

SimOutput simulate_volterra(const VolterraModel& model, const EnsembleConfig& cfg);

/// X^n_t = n^{-1/2} sum_{k <= floor(n t)} xi_k with xi_k = +-1 fair coins.
SimOutput simulate_random_walk(int n, const EnsembleConfig& cfg);

}  // namespace mpmlab
