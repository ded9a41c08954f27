#include "mpmlab/simulate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mpmlab/parallel.hpp"

namespace mpmlab {

std::size_t EnsembleConfig::steps() const {
  if (!(grid_step > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("EnsembleConfig: step and horizon must be positive");
  const double ratio = horizon / grid_step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("EnsembleConfig: grid_step must divide horizon");
  return static_cast<std::size_t>(rounded);
}

double EnsembleConfig::grid_time(std::size_t k) const {
  return horizon * static_cast<double>(k) / static_cast<double>(steps());
}

namespace {

void check_config(const EnsembleConfig& cfg) {
  if (cfg.n_paths < 1) throw std::invalid_argument("EnsembleConfig: n_paths must be positive");
  (void)cfg.steps();
}

Vec initial_state(const EnsembleConfig& cfg, RandomStream& rng) {
  return cfg.initial_sampler ? cfg.initial_sampler(rng) : cfg.initial;
}

[[noreturn]] void abort_path(std::size_t path, double t, const char* what) {
  std::ostringstream os;
  os << "simulation aborted: path " << path << " at t=" << t << ": " << what;
  throw std::runtime_error(os.str());
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct EulerPath {
  CadlagPath path;
  CadlagPath control;
};

// One Euler path. Increments of the sub-step ending at an event are applied
// at that event, so a scheduled jump is evaluated at the step path's left
// limit and the continuous increment of its sub-step lands together with it.
EulerPath euler_path(const CharModel& model, const EnsembleConfig& cfg, std::size_t index, bool with_jumps) {
  RandomStream rng(cfg.seed, index);
  const std::size_t n = cfg.steps();
  const std::size_t d = model.dim;
  const std::size_t r = model.noise_dim;
  Vec x = initial_state(cfg, rng);
  if (x.size() != d) throw std::invalid_argument("simulate: initial state has wrong dimension");

  PathBuilder path(x, cfg.horizon);
  PathBuilder control(0.0, cfg.horizon);
  path.reserve(n + model.scheduled.size());
  control.reserve(n + model.scheduled.size());
  double control_level = 0.0;
  std::vector<double> noise(r);
  Vec incr(d);

  auto scheduled = model.scheduled.begin();
  const auto scheduled_end = model.scheduled.end();
  while (scheduled != scheduled_end && scheduled->time <= 0.0) ++scheduled;

  // Continuous Euler increment over [t0, t0 + len] with coefficients frozen at (t0, x).
  auto continuous = [&](double t0, double len, double& magnitude) {
    std::fill(incr.begin(), incr.end(), 0.0);
    magnitude = 0.0;
    if (model.drift) {
      const Vec b = model.drift_at(t0, x);
      if (!all_finite(b)) abort_path(index, t0, "non-finite drift");
      Vec db(d);
      for (std::size_t i = 0; i < d; ++i) db[i] = b[i] * len;
      for (std::size_t i = 0; i < d; ++i) incr[i] += db[i];
      magnitude += norm(db);
    }
    if (model.diffusion) {
      const Vec s = model.diffusion_at(t0, x);
      if (!all_finite(s)) abort_path(index, t0, "non-finite diffusion");
      const double root = std::sqrt(len);
      for (auto& z : noise) z = rng.normal() * root;
      Vec dw(d, 0.0);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < r; ++k) dw[i] += s[i * r + k] * noise[k];
      for (std::size_t i = 0; i < d; ++i) incr[i] += dw[i];
      magnitude += norm(dw);
    }
  };

  auto draw = [&](const JumpLaw& law) -> const Vec& {
    if (law.sizes.empty()) throw std::invalid_argument("simulate: empty jump law");
    return law.sizes[rng.categorical(law.probs)];
  };

  for (std::size_t k = 0; k < n; ++k) {
    const double t0 = cfg.grid_time(k);
    const double t1 = cfg.grid_time(k + 1);
    double seg_start = t0;
    // Scheduled atoms inside (t0, t1].
    while (with_jumps && scheduled != scheduled_end && scheduled->time <= t1) {
      const double tau = scheduled->time;
      double mag = 0.0;
      continuous(seg_start, tau - seg_start, mag);
      const JumpLaw law = scheduled->law(x);
      const Vec& jump = draw(law);
      if (jump.size() != d) throw std::invalid_argument("simulate: scheduled jump has wrong dimension");
      const double expected = law.expect([](std::span<const double> v) { return norm(v); });
      for (std::size_t i = 0; i < d; ++i) x[i] += incr[i] + jump[i];
      if (!all_finite(x)) abort_path(index, tau, "non-finite state");
      control_level += mag + norm(jump) + expected;
      path.push(tau, x);
      control.push(tau, control_level);
      seg_start = tau;
      ++scheduled;
    }
    if (seg_start >= t1) continue;
    double mag = 0.0;
    continuous(seg_start, t1 - seg_start, mag);
    double jump_mag = 0.0;
    Vec jump;
    if (with_jumps && model.has_random_jumps()) {
      const double p = model.intensity_at(t0, x) * cfg.grid_step;
      if (p > 0.1) {
        std::ostringstream os;
        os << "jump intensity * grid_step = " << p << " exceeds 0.1; use a finer grid";
        throw std::domain_error(os.str());
      }
      if (p > 0.0) {
        const JumpLaw law = model.jump_law(t0, x);
        jump_mag = p * law.expect([](std::span<const double> v) { return norm(v); });
        if (rng.bernoulli(p)) {
          jump = draw(law);
          if (jump.size() != d) throw std::invalid_argument("simulate: jump has wrong dimension");
          jump_mag += norm(jump);
        }
      }
    }
    for (std::size_t i = 0; i < d; ++i) x[i] += incr[i] + (jump.empty() ? 0.0 : jump[i]);
    if (!all_finite(x)) abort_path(index, t1, "non-finite state");
    control_level += mag + jump_mag;
    path.push(t1, x);
    control.push(t1, control_level);
  }
  return {std::move(path).build(), std::move(control).build()};
}

SimOutput euler_ensemble(std::shared_ptr<const CharModel> model, const EnsembleConfig& cfg, bool with_jumps) {
  if (!model) throw std::invalid_argument("simulate: null model");
  check_config(cfg);
  SimOutput out;
  out.paths.resize(cfg.n_paths);
  std::vector<CadlagPath> controls(with_jumps ? cfg.n_paths : 0);
  parallel_for(cfg.n_paths, resolve_threads(cfg.threads), [&](std::size_t i) {
    auto res = euler_path(*model, cfg, i, with_jumps);
    out.paths[i] = std::move(res.path);
    if (with_jumps) controls[i] = std::move(res.control);
  });
  if (with_jumps) out.controls = std::move(controls);
  out.model = std::move(model);
  out.grid_step = cfg.grid_step;
  out.horizon = cfg.horizon;
  return out;
}

}  // namespace

SimOutput simulate_ito(std::shared_ptr<const CharModel> model, const EnsembleConfig& cfg) {
  if (model && (model->has_random_jumps() || !model->scheduled.empty()))
    throw std::invalid_argument("simulate_ito: model has jumps; use simulate_jump_diffusion");
  return euler_ensemble(std::move(model), cfg, false);
}

SimOutput simulate_jump_diffusion(std::shared_ptr<const CharModel> model, const EnsembleConfig& cfg) {
  return euler_ensemble(std::move(model), cfg, true);
}

JumpControl control_from_path(const CadlagPath& control, std::size_t dim) {
  return JumpControl::from_control_path(control, Kappa::affine(1.0, 1.0), Vec(dim, 0.0));
}

SimOutput simulate_ek_ftd_chain(std::size_t states, const std::vector<double>& generator,
                                const LocallyFiniteMeasure& q, const EnsembleConfig& cfg) {
  check_config(cfg);
  if (states == 0 || generator.size() != states * states)
    throw std::invalid_argument("simulate_ek_ftd_chain: generator must be states x states");
  double max_exit = 0.0;
  for (std::size_t i = 0; i < states; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < states; ++j) {
      const double v = generator[i * states + j];
      if (i != j && v < 0.0) throw std::invalid_argument("simulate_ek_ftd_chain: negative off-diagonal rate");
      row += v;
    }
    if (std::abs(row) > 1e-12 * std::max(1.0, -generator[i * states + i]))
      throw std::invalid_argument("simulate_ek_ftd_chain: generator rows must sum to zero");
    max_exit = std::max(max_exit, -generator[i * states + i]);
  }
  for (const auto& a : q.atoms()) {
    if (a.mass * max_exit > 1.0 + 1e-12)
      throw std::invalid_argument("simulate_ek_ftd_chain: I + Lambda q({t}) is not stochastic at an atom");
  }
  if (q.horizon() < cfg.horizon) throw std::invalid_argument("simulate_ek_ftd_chain: q horizon shorter than ensemble");

  // Boundaries where the Lebesgue density may change.
  std::vector<double> breaks;
  for (const auto& s : q.segments()) breaks.push_back(s.start);

  SimOutput out;
  out.paths.resize(cfg.n_paths);
  parallel_for(cfg.n_paths, resolve_threads(cfg.threads), [&](std::size_t p) {
    RandomStream rng(cfg.seed, p);
    const Vec init = initial_state(cfg, rng);
    if (init.size() != 1) throw std::invalid_argument("simulate_ek_ftd_chain: initial state must be scalar");
    auto state = static_cast<std::size_t>(std::lround(init[0]));
    if (state >= states) throw std::invalid_argument("simulate_ek_ftd_chain: initial state out of range");
    PathBuilder path(static_cast<double>(state), cfg.horizon);
    double t = 0.0;
    auto atom = q.atoms().begin();
    while (atom != q.atoms().end() && atom->time <= 0.0) ++atom;

    auto jump_from = [&](std::size_t i, double extra_self) {
      std::vector<double> w(states);
      for (std::size_t j = 0; j < states; ++j) w[j] = j == i ? extra_self : generator[i * states + j];
      return rng.categorical(w);
    };

    while (t < cfg.horizon) {
      const double stop = atom != q.atoms().end() ? std::min(atom->time, cfg.horizon) : cfg.horizon;
      // Exponential clock against the Lebesgue part on (t, stop).
      const double exit_rate = -generator[state * states + state];
      double budget = exit_rate > 0.0 ? rng.exponential(1.0) / exit_rate : INFINITY;
      double cursor = t;
      bool jumped = false;
      while (cursor < stop) {
        auto next_break = std::upper_bound(breaks.begin(), breaks.end(), cursor);
        const double piece_end = next_break == breaks.end() ? stop : std::min(stop, *next_break);
        const double rate = q.rate_at(cursor);
        const double mass = rate * (piece_end - cursor);
        if (rate > 0.0 && budget <= mass) {
          cursor += budget / rate;
          jumped = true;
          break;
        }
        budget -= mass;
        cursor = piece_end;
      }
      if (jumped && cursor < stop) {
        state = jump_from(state, 0.0);
        path.push(cursor, static_cast<double>(state));
        t = cursor;
        continue;
      }
      t = stop;
      if (atom != q.atoms().end() && atom->time <= cfg.horizon && atom->time == stop) {
        // One step of I + Lambda q({t}).
        const double stay = 1.0 - exit_rate * atom->mass;
        std::vector<double> w(states);
        for (std::size_t j = 0; j < states; ++j)
          w[j] = j == state ? std::max(0.0, stay) : generator[state * states + j] * atom->mass;
        const std::size_t next = rng.categorical(w);
        if (next != state) {
          state = next;
          path.push(stop, static_cast<double>(state));
        }
        ++atom;
      }
    }
    out.paths[p] = std::move(path).build();
  });
  out.grid_step = cfg.grid_step;
  out.horizon = cfg.horizon;
  return out;
}

SimOutput simulate_volterra(const VolterraModel& model, const EnsembleConfig& cfg) {
  check_config(cfg);
  const std::size_t n = cfg.steps();
  const std::size_t d = model.dim_x;
  const std::size_t k = model.dim_z;
  if (model.g0.size() != n + 1) throw std::invalid_argument("simulate_volterra: g0 must have one sample per grid point");
  if (model.kernel.size() != n + 1) throw std::invalid_argument("simulate_volterra: kernel/grid length mismatch");
  for (const auto& g : model.g0)
    if (g.size() != d) throw std::invalid_argument("simulate_volterra: g0 sample has wrong dimension");
  for (const auto& m : model.kernel)
    if (m.size() != d * k) throw std::invalid_argument("simulate_volterra: kernel sample has wrong shape");

  SimOutput out;
  out.paths.resize(cfg.n_paths);
  out.drivers.resize(cfg.n_paths);
  const double dt = cfg.grid_step;
  const double root_dt = std::sqrt(dt);
  parallel_for(cfg.n_paths, resolve_threads(cfg.threads), [&](std::size_t p) {
    RandomStream rng(cfg.seed, p);
    Vec x = model.g0[0];
    Vec z(k, 0.0);
    std::vector<Vec> dz;  // Z increments, the one at step j lands at grid point j + 1
    dz.reserve(n);
    PathBuilder xb(x, cfg.horizon);
    PathBuilder zb(z, cfg.horizon);
    xb.reserve(n);
    zb.reserve(n);
    Vec noise(k);
    for (std::size_t i = 0; i < n; ++i) {
      Vec step(k, 0.0);
      if (model.drift) {
        const Vec b = model.drift(x);
        if (b.size() != k || !all_finite(b)) abort_path(p, cfg.grid_time(i), "bad Volterra drift");
        for (std::size_t a = 0; a < k; ++a) step[a] += b[a] * dt;
      }
      if (model.covariance) {
        const Vec cov = model.covariance(x);
        if (cov.size() != k * k || !all_finite(cov)) abort_path(p, cfg.grid_time(i), "bad Volterra covariance");
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(
            cov.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
        Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
        if (ldlt.info() != Eigen::Success) abort_path(p, cfg.grid_time(i), "covariance not positive semidefinite");
        Eigen::VectorXd w(static_cast<Eigen::Index>(k));
        for (auto& v : noise) v = rng.normal() * root_dt;
        for (std::size_t a = 0; a < k; ++a) w[static_cast<Eigen::Index>(a)] = noise[a];
        // Root of P^T L D L^T P applied to white noise.
        Eigen::VectorXd root = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt().asDiagonal() * w;
        Eigen::VectorXd corr = ldlt.transpositionsP().transpose() * (ldlt.matrixL() * root);
        for (std::size_t a = 0; a < k; ++a) step[a] += corr[static_cast<Eigen::Index>(a)];
      }
      if (model.intensity) {
        const double pr = model.intensity(x) * dt;
        if (pr > 0.1) throw std::domain_error("simulate_volterra: intensity * grid_step exceeds 0.1");
        if (pr > 0.0 && rng.bernoulli(pr)) {
          const JumpLaw law = model.jump_law(x);
          const Vec& j = law.sizes.at(rng.categorical(law.probs));
          for (std::size_t a = 0; a < k; ++a) step[a] += j.at(a);
        }
      }
      for (std::size_t a = 0; a < k; ++a) z[a] += step[a];
      dz.push_back(std::move(step));
      // X at grid point i + 1: g0 plus the kernel convolved with Z jumps so far.
      x = model.g0[i + 1];
      for (std::size_t j = 0; j <= i; ++j) {
        const Vec& kern = model.kernel[i - j];
        for (std::size_t r = 0; r < d; ++r)
          for (std::size_t a = 0; a < k; ++a) x[r] += kern[r * k + a] * dz[j][a];
      }
      if (!all_finite(x)) abort_path(p, cfg.grid_time(i + 1), "non-finite Volterra state");
      xb.push(cfg.grid_time(i + 1), x);
      zb.push(cfg.grid_time(i + 1), z);
    }
    out.paths[p] = std::move(xb).build();
    out.drivers[p] = std::move(zb).build();
  });
  out.grid_step = cfg.grid_step;
  out.horizon = cfg.horizon;
  return out;
}

SimOutput simulate_random_walk(int n, const EnsembleConfig& cfg) {
  if (n < 1) throw std::invalid_argument("simulate_random_walk: n must be positive");
  if (cfg.n_paths < 1) throw std::invalid_argument("EnsembleConfig: n_paths must be positive");
  const auto steps = static_cast<std::size_t>(std::floor(n * cfg.horizon + 1e-9));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  SimOutput out;
  out.paths.resize(cfg.n_paths);
  parallel_for(cfg.n_paths, resolve_threads(cfg.threads), [&](std::size_t p) {
    RandomStream rng(cfg.seed, p);
    PathBuilder b(0.0, cfg.horizon);
    b.reserve(steps);
    long sum = 0;
    for (std::size_t k = 1; k <= steps; ++k) {
      sum += rng.uniform() < 0.5 ? 1 : -1;
      b.push(static_cast<double>(k) / n, static_cast<double>(sum) * scale);
    }
    out.paths[p] = std::move(b).build();
  });
  out.grid_step = 1.0 / n;
  out.horizon = cfg.horizon;
  return out;
}

}  // namespace mpmlab
