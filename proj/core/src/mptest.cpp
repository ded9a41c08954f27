#include "mpmlab/mptest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mpmlab/parallel.hpp"

namespace mpmlab {

const char* family_name(Family f) {
  switch (f) {
    case Family::SV: return "SV";
    case Family::EK: return "EK";
    case Family::EK_FTD: return "EK_FTD";
    case Family::SMG_i: return "SMG_i";
    case Family::SMG_ii: return "SMG_ii";
    case Family::SMG_iii: return "SMG_iii";
    case Family::SMG_star: return "SMG_star";
    case Family::VOLTERRA: return "VOLTERRA";
  }
  return "?";
}

TestFunction identity_function() {
  return {"x", [](std::span<const double> x) { return x[0]; },
          [](std::span<const double>) { return Vec{1.0}; }, [](std::span<const double>) { return Vec{0.0}; }};
}

TestFunction square_function() {
  return {"x^2", [](std::span<const double> x) { return x[0] * x[0]; },
          [](std::span<const double> x) { return Vec{2.0 * x[0]}; },
          [](std::span<const double>) { return Vec{2.0}; }};
}

TestFunction cosine_function() {
  return {"cos", [](std::span<const double> x) { return std::cos(x[0]); },
          [](std::span<const double> x) { return Vec{-std::sin(x[0])}; },
          [](std::span<const double> x) { return Vec{-std::cos(x[0])}; }};
}

namespace {

// Calls fn(start, end, row) for each constancy piece of `path` on [0, t].
template <typename Fn>
void for_each_piece(const CadlagPath& path, double t, Fn&& fn) {
  const std::size_t last = path.row_at(t);
  double start = 0.0;
  for (std::size_t k = 0; k <= last; ++k) {
    const double end = k < last ? path.event_time(k) : t;
    if (end > start) fn(start, end, k);
    start = end;
  }
}

double generator_term(const TestFunction& f, const Vec& b, const Vec& sigma, std::size_t noise_dim,
                      std::span<const double> x) {
  const std::size_t d = x.size();
  double out = 0.0;
  if (!b.empty()) {
    const Vec grad = f.gradient(x);
    for (std::size_t i = 0; i < d; ++i) out += b[i] * grad[i];
  }
  if (!sigma.empty()) {
    const Vec hess = f.hessian(x);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        double c = 0.0;
        for (std::size_t k = 0; k < noise_dim; ++k) c += sigma[i * noise_dim + k] * sigma[j * noise_dim + k];
        out += 0.5 * c * hess[i * d + j];
      }
  }
  return out;
}

void check_vanishes_near_zero(const GFunction& g, std::size_t d) {
  for (std::size_t i = 0; i < d; ++i) {
    for (double sign : {1.0, -1.0}) {
      Vec x(d, 0.0);
      x[i] = sign * 1e-6;
      if (g.fn(x) != 0.0) throw std::invalid_argument("build_smg_tests: g '" + g.name + "' does not vanish near 0");
    }
  }
  if (g.fn(Vec(d, 0.0)) != 0.0) throw std::invalid_argument("build_smg_tests: g '" + g.name + "' nonzero at 0");
}

}  // namespace

TestProcess build_sv_test(const TestFunction& f, StateFn drift, StateFn diffusion, std::size_t noise_dim) {
  if (!f.value || (drift && !f.gradient) || (diffusion && !f.hessian))
    throw std::invalid_argument("build_sv_test: test function lacks required derivatives");
  TestProcess y;
  y.family = Family::SV;
  y.label = "SV[" + f.name + "]";
  y.evaluator = [f, drift = std::move(drift), diffusion = std::move(diffusion), noise_dim](
                    const CadlagPath*, const CadlagPath& path, double t) {
    double integral = 0.0;
    for_each_piece(path, t, [&](double a, double b, std::size_t row) {
      const auto x = path.value(row);
      const Vec bv = drift ? drift(a, x) : Vec{};
      const Vec sv = diffusion ? diffusion(a, x) : Vec{};
      integral += generator_term(f, bv, sv, noise_dim, x) * (b - a);
    });
    return f.value(path.eval(t)) - f.value(path.initial_value()) - integral;
  };
  return y;
}

TestProcess build_ek_test(ScalarFn f, ScalarFn g, double f_sup, double g_sup) {
  TestProcess y;
  y.family = Family::EK;
  y.label = "EK";
  y.evaluator = [f, g](const CadlagPath*, const CadlagPath& path, double t) {
    double integral = 0.0;
    for_each_piece(path, t, [&](double a, double b, std::size_t row) { integral += g(path.value(row)) * (b - a); });
    return f(path.eval(t)) - f(path.initial_value()) - integral;
  };
  y.bound = [f_sup, g_sup](double t) { return 2.0 * f_sup + g_sup * t; };
  return y;
}

TestProcess build_ek_ftd_test(ScalarFn f, ScalarFn g, LocallyFiniteMeasure q, double f_sup, double g_sup) {
  TestProcess y;
  y.family = Family::EK_FTD;
  y.label = "EK_FTD";
  y.bound = [q, f_sup, g_sup](double t) { return 2.0 * f_sup + g_sup * q.cdf(t); };
  y.evaluator = [f = std::move(f), g = std::move(g), q = std::move(q)](const CadlagPath*, const CadlagPath& path,
                                                                      double t) {
    if (t > q.horizon() * (1.0 + 1e-12)) throw std::domain_error("EK_FTD test: t beyond the horizon of q");
    return f(path.eval(t)) - f(path.initial_value()) - integrate_left(path, q, t, g);
  };
  return y;
}

Vec truncated_process(const CadlagPath& path, double t, const TruncationSpec& h) {
  const auto xt = path.eval(t);
  Vec out(xt.begin(), xt.end());
  for (const auto& j : path.jumps(t)) {
    const Vec hj = h.apply(j.delta);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= j.delta[i] - hj[i];
  }
  return out;
}

std::vector<TestProcess> build_smg_tests(std::shared_ptr<const CharModel> model, const std::vector<GFunction>& g_family,
                                         const std::vector<TestFunction>& star_functions) {
  if (!model) throw std::invalid_argument("build_smg_tests: null model");
  const std::size_t d = model->dim;
  for (const auto& g : g_family) check_vanishes_near_zero(g, d);

  // M(h)_t = X(h)_t - X_0 - B_t.
  auto martingale_part = [model](const CadlagPath& path, double t, const RealizedCharacteristics* rc) {
    Vec m = truncated_process(path, t, model->truncation);
    const auto x0 = path.initial_value();
    for (std::size_t i = 0; i < m.size(); ++i) m[i] -= x0[i];
    if (t > 0.0) {
      const auto b = rc->B.terminal_value();
      for (std::size_t i = 0; i < m.size(); ++i) m[i] -= b[i];
    }
    return m;
  };

  std::vector<TestProcess> out;
  for (std::size_t i = 0; i < d; ++i) {
    TestProcess y;
    y.family = Family::SMG_i;
    y.label = "SMG_i[" + std::to_string(i) + "]";
    y.evaluator = [model, i, martingale_part](const CadlagPath*, const CadlagPath& path, double t) {
      if (t <= 0.0) return 0.0;
      const auto rc = realize(*model, path, t);
      return martingale_part(path, t, &rc)[i];
    };
    out.push_back(std::move(y));
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      TestProcess y;
      y.family = Family::SMG_ii;
      y.label = "SMG_ii[" + std::to_string(i) + "," + std::to_string(j) + "]";
      y.evaluator = [model, i, j, d, martingale_part](const CadlagPath*, const CadlagPath& path, double t) {
        if (t <= 0.0) return 0.0;
        const auto rc = realize(*model, path, t);
        const Vec m = martingale_part(path, t, &rc);
        return m[i] * m[j] - rc.Ctilde.terminal_value()[i * d + j];
      };
      out.push_back(std::move(y));
    }
  }
  for (std::size_t q = 0; q < g_family.size(); ++q) {
    TestProcess y;
    y.family = Family::SMG_iii;
    y.label = "SMG_iii[" + g_family[q].name + "]";
    y.evaluator = [model, g = g_family[q]](const CadlagPath*, const CadlagPath& path, double t) {
      if (t <= 0.0) return 0.0;
      double sum = 0.0;
      for (const auto& jump : path.jumps(t)) sum += g.fn(jump.delta);
      const auto rc = realize(*model, path, t, {g});
      return sum - rc.g_nu[0].terminal_value()[0];
    };
    out.push_back(std::move(y));
  }
  for (const auto& f : star_functions) {
    if (!f.value || !f.gradient || !f.hessian)
      throw std::invalid_argument("build_smg_tests: star function lacks derivatives");
    TestProcess y;
    y.family = Family::SMG_star;
    y.label = "SMG_star[" + f.name + "]";
    y.evaluator = [model, f](const CadlagPath*, const CadlagPath& path, double t) {
      auto jump_generator = [&f](const JumpLaw& law, std::span<const double> x) {
        const double fx = f.value(x);
        return law.expect([&](std::span<const double> j) {
          Vec y(x.begin(), x.end());
          for (std::size_t i = 0; i < y.size(); ++i) y[i] += j[i];
          return f.value(y) - fx;
        });
      };
      double integral = 0.0;
      // Lebesgue part, coefficients frozen at the left end of each piece,
      // with pieces split at the scheduled times.
      std::vector<double> cuts;
      for (const auto& s : model->scheduled)
        if (s.time > 0.0 && s.time <= t) cuts.push_back(s.time);
      for_each_piece(path, t, [&](double a, double b, std::size_t row) {
        const auto x = path.value(row);
        double lo = a;
        auto it = std::upper_bound(cuts.begin(), cuts.end(), a);
        while (lo < b) {
          const double hi = (it != cuts.end() && *it < b) ? *it++ : b;
          const Vec bv = model->drift_at(lo, x);
          const Vec sv = model->diffusion ? model->diffusion_at(lo, x) : Vec{};
          double rate = generator_term(f, bv, sv, model->noise_dim, x);
          if (model->has_random_jumps()) {
            const double lambda = model->intensity_at(lo, x);
            if (lambda > 0.0) rate += lambda * jump_generator(model->jump_law(lo, x), x);
          }
          integral += rate * (hi - lo);
          lo = hi;
        }
      });
      for (const auto& s : model->scheduled) {
        if (s.time <= 0.0 || s.time > t) continue;
        const auto x = path.eval_left(s.time);
        integral += jump_generator(s.law(x), x);
      }
      return f.value(path.eval(t)) - f.value(path.initial_value()) - integral;
    };
    out.push_back(std::move(y));
  }
  return out;
}

TestProcess build_volterra_test(const TestFunction& f, const VolterraModel& model, TruncationSpec h) {
  if (!f.value || !f.gradient || !f.hessian) throw std::invalid_argument("build_volterra_test: f lacks derivatives");
  (void)h;
  TestProcess y;
  y.family = Family::VOLTERRA;
  y.label = "VOLTERRA[" + f.name + "]";
  y.evaluator = [f, model](const CadlagPath* driver, const CadlagPath& x_path, double t) {
    if (driver == nullptr) throw std::invalid_argument("VOLTERRA test: driver path Z required as companion");
    const CadlagPath& z_path = *driver;
    const std::size_t k = model.dim_z;
    // Merge the constancy pieces of X and Z.
    std::vector<double> cuts;
    for (double s : x_path.times()) {
      if (s > t) break;
      cuts.push_back(s);
    }
    for (double s : z_path.times()) {
      if (s > t) break;
      cuts.push_back(s);
    }
    cuts.push_back(t);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double integral = 0.0;
    double a = 0.0;
    for (double b : cuts) {
      if (b <= a) continue;
      const auto x = x_path.eval(a);
      const auto z = z_path.eval(a);
      double rate = 0.0;
      if (model.drift) {
        const Vec bz = model.drift(x);
        const Vec grad = f.gradient(z);
        for (std::size_t i = 0; i < k; ++i) rate += bz[i] * grad[i];
      }
      if (model.covariance) {
        const Vec cov = model.covariance(x);
        const Vec hess = f.hessian(z);
        for (std::size_t i = 0; i < k * k; ++i) rate += 0.5 * cov[i] * hess[i];
      }
      if (model.intensity) {
        const double lambda = model.intensity(x);
        if (lambda > 0.0) {
          const double fz = f.value(z);
          rate += lambda * model.jump_law(x).expect([&](std::span<const double> j) {
            Vec w(z.begin(), z.end());
            for (std::size_t i = 0; i < k; ++i) w[i] += j[i];
            return f.value(w) - fz;
          });
        }
      }
      integral += rate * (b - a);
      a = b;
    }
    return f.value(z_path.eval(t)) - f.value(z_path.initial_value()) - integral;
  };
  return y;
}

DeterminingFunction::DeterminingFunction(Mode mode, double anchor, std::vector<double> times,
                                         std::vector<ScalarFn> factors, double bound)
    : mode(mode), anchor(anchor), times(std::move(times)), factors(std::move(factors)), bound(bound) {
  if (this->times.size() != this->factors.size())
    throw std::invalid_argument("DeterminingFunction: one factor per time required");
  for (double t : this->times)
    if (t < 0.0 || t > anchor) throw std::invalid_argument("DeterminingFunction: times must lie in [0, anchor]");
}

DeterminingFunction DeterminingFunction::one(double anchor) { return {Mode::pointwise, anchor, {}, {}, 1.0}; }

double DeterminingFunction::operator()(const CadlagPath& path) const {
  double z = 1.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (mode == Mode::pointwise) {
      z *= factors[i](path.eval(times[i]));
    } else {
      const std::size_t d = path.dim();
      Vec integral(d, 0.0);
      for_each_piece(path, times[i], [&](double a, double b, std::size_t row) {
        const auto v = path.value(row);
        for (std::size_t j = 0; j < d; ++j) integral[j] += v[j] * (b - a);
      });
      z *= factors[i](integral);
    }
  }
  return z;
}

DeterminingFunction parse_determining_function(const std::string& text, double anchor) {
  if (text.empty() || text == "one") return DeterminingFunction::one(anchor);
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("zfun: expected 'one' or '<mode>:<items>'");
  const std::string mode_name = text.substr(0, colon);
  DeterminingFunction::Mode mode;
  if (mode_name == "pointwise") {
    mode = DeterminingFunction::Mode::pointwise;
  } else if (mode_name == "integrated") {
    mode = DeterminingFunction::Mode::integrated;
  } else {
    throw std::invalid_argument("zfun: unknown mode '" + mode_name + "'");
  }
  std::vector<double> times;
  std::vector<ScalarFn> factors;
  std::stringstream items(text.substr(colon + 1));
  std::string item;
  while (std::getline(items, item, ',')) {
    const auto at = item.find('@');
    if (at == std::string::npos) throw std::invalid_argument("zfun: item '" + item + "' lacks '@time'");
    const std::string fname = item.substr(0, at);
    std::string tstr = item.substr(at + 1);
    double t = 0.0;
    try {
      if (!tstr.empty() && tstr.back() == 's') {
        tstr.pop_back();
        t = (tstr.empty() ? 1.0 : std::stod(tstr)) * anchor;
      } else {
        t = std::stod(tstr);
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("zfun: bad time '" + item.substr(at + 1) + "'");
    }
    ScalarFn fn;
    if (fname == "tanh") {
      fn = [](std::span<const double> x) { return std::tanh(x[0]); };
    } else if (fname == "cos") {
      fn = [](std::span<const double> x) { return std::cos(x[0]); };
    } else if (fname == "sin") {
      fn = [](std::span<const double> x) { return std::sin(x[0]); };
    } else if (fname == "atan") {
      fn = [](std::span<const double> x) { return std::atan(x[0]) / (M_PI / 2); };
    } else if (fname == "sigmoid") {
      fn = [](std::span<const double> x) { return 1.0 / (1.0 + std::exp(-x[0])); };
    } else if (fname == "clip") {
      fn = [](std::span<const double> x) { return std::clamp(x[0], -1.0, 1.0); };
    } else {
      throw std::invalid_argument("zfun: unknown factor '" + fname + "'");
    }
    times.push_back(t);
    factors.push_back(std::move(fn));
  }
  return {mode, anchor, std::move(times), std::move(factors), 1.0};
}

std::vector<double> dense_times(double step, double horizon, const LocallyFiniteMeasure* q) {
  if (!(step > 0.0)) throw std::invalid_argument("dense_times: step must be positive");
  const auto n = static_cast<long>(std::floor(horizon / step + 1e-9));
  std::vector<double> out;
  for (long k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * step;
    if (q != nullptr && q->atom_mass(t) > 0.0) continue;
    out.push_back(t);
  }
  return out;
}

DefectReport defect_statistic(const SimOutput& ensemble, const TestProcess& Y, const DeterminingFunction& Z, double s,
                              double t, double z_threshold, std::size_t threads) {
  if (ensemble.paths.empty()) throw std::invalid_argument("defect_statistic: empty ensemble");
  if (!(s < t)) throw std::invalid_argument("defect_statistic: need s < t");
  if (Z.anchor > s) throw std::invalid_argument("defect_statistic: determining function anchored after s");
  const std::size_t n = ensemble.paths.size();
  std::vector<double> values(n);
  parallel_for(n, resolve_threads(threads), [&](std::size_t i) {
    const CadlagPath* companion = nullptr;
    if (ensemble.controls) {
      companion = &(*ensemble.controls)[i];
    } else if (!ensemble.drivers.empty()) {
      companion = &ensemble.drivers[i];
    }
    const auto& path = ensemble.paths[i];
    values[i] = (Y.evaluator(companion, path, t) - Y.evaluator(companion, path, s)) * Z(path);
  });
  const MeanSe ms = mean_and_se(values);
  DefectReport r;
  r.s = s;
  r.t = t;
  r.estimate = ms.mean;
  r.std_error = ms.std_error;
  r.n = n;
  r.z_threshold = z_threshold;
  r.pass = std::abs(r.estimate) <= z_threshold * r.std_error;
  return r;
}

UiReport ui_diagnostic(std::span<const double> samples, std::vector<double> z_grid, double threshold) {
  if (samples.empty()) throw std::invalid_argument("ui_diagnostic: empty sample");
  std::sort(z_grid.begin(), z_grid.end());
  UiReport r;
  r.threshold = threshold;
  r.z = z_grid;
  std::vector<double> excess(samples.size());
  for (double z : z_grid) {
    std::transform(samples.begin(), samples.end(), excess.begin(),
                   [z](double x) { return std::max(0.0, std::abs(x) - z); });
    r.excess.push_back(pairwise_sum(excess) / static_cast<double>(samples.size()));
  }
  r.suspect = !r.excess.empty() && r.excess.back() > threshold;
  return r;
}

GapReport mg_approx_gap(std::span<const std::pair<double, double>> pairs, double epsilon) {
  if (pairs.empty()) throw std::invalid_argument("mg_approx_gap: no pairs");
  std::vector<double> hit(pairs.size());
  std::vector<double> gap(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    gap[i] = std::abs(pairs[i].first - pairs[i].second);
    hit[i] = gap[i] >= epsilon ? 1.0 : 0.0;
  }
  GapReport r;
  r.n = pairs.size();
  r.probability = pairwise_sum(hit) / static_cast<double>(r.n);
  r.std_error = std::sqrt(r.probability * (1.0 - r.probability) / static_cast<double>(r.n));
  r.l1_mean = pairwise_sum(gap) / static_cast<double>(r.n);
  return r;
}

}  // namespace mpmlab
