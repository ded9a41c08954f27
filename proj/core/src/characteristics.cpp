#include "mpmlab/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mpmlab/parallel.hpp"
#include "mpmlab/random.hpp"

namespace mpmlab {

GFunction ramp_g(double a) {
  if (!(a > 0.0)) throw std::invalid_argument("ramp_g: a must be positive");
  std::ostringstream name;
  name << "ramp:" << a;
  return {name.str(), [a](std::span<const double> x) { return std::min(1.0, std::max(0.0, norm(x) - a) / a); }};
}

std::vector<GFunction> ramp_family(int levels) {
  std::vector<GFunction> out;
  for (int k = 1; k <= levels; ++k) out.push_back(ramp_g(std::ldexp(1.0, -k)));
  return out;
}

namespace {

// Layout of the packed integrand: [b (d) | c (d*d) | int hh dnu (d*d) | g (G) | ||b||].
struct Layout {
  std::size_t d;
  std::size_t g;
  std::size_t b() const { return 0; }
  std::size_t c() const { return d; }
  std::size_t hh() const { return d + d * d; }
  std::size_t gs() const { return d + 2 * d * d; }
  std::size_t var() const { return d + 2 * d * d + g; }
  std::size_t size() const { return var() + 1; }
};

void add_jump_moments(const Layout& L, const CharModel& model, const JumpLaw& law, double weight,
                      const std::vector<GFunction>& g_family, Vec& out) {
  for (std::size_t k = 0; k < law.sizes.size(); ++k) {
    const double p = law.probs[k] * weight;
    if (p == 0.0) continue;
    const Vec h = model.truncation.apply(law.sizes[k]);
    for (std::size_t i = 0; i < L.d; ++i) {
      out[L.b() + i] += p * h[i];
      for (std::size_t j = 0; j < L.d; ++j) out[L.hh() + i * L.d + j] += p * h[i] * h[j];
    }
    for (std::size_t q = 0; q < g_family.size(); ++q) out[L.gs() + q] += p * g_family[q].fn(law.sizes[k]);
  }
}

Vec continuous_rate(const Layout& L, const CharModel& model, double s, std::span<const double> x,
                    const std::vector<GFunction>& g_family) {
  Vec out(L.size(), 0.0);
  const Vec b = model.drift_at(s, x);
  for (std::size_t i = 0; i < L.d; ++i) out[L.b() + i] = b[i];
  if (model.diffusion) {
    const Vec sig = model.diffusion_at(s, x);
    const std::size_t r = model.noise_dim;
    for (std::size_t i = 0; i < L.d; ++i)
      for (std::size_t j = 0; j < L.d; ++j) {
        double v = 0.0;
        for (std::size_t k = 0; k < r; ++k) v += sig[i * r + k] * sig[j * r + k];
        out[L.c() + i * L.d + j] = v;
      }
  }
  if (model.has_random_jumps()) {
    const double lambda = model.intensity_at(s, x);
    if (lambda > 0.0) add_jump_moments(L, model, model.jump_law(s, x), lambda, g_family, out);
  }
  out[L.var()] = norm(std::span<const double>(out.data() + L.b(), L.d));
  for (double v : out)
    if (!std::isfinite(v)) throw std::domain_error("realize: non-finite characteristic density");
  return out;
}

}  // namespace

RealizedCharacteristics realize(const CharModel& model, const CadlagPath& path, double T,
                                const std::vector<GFunction>& g_family, Quadrature quadrature, int refinement) {
  const std::size_t d = model.dim;
  if (path.dim() != d) throw std::invalid_argument("realize: path dimension differs from model");
  if (!(T > 0.0) || T > path.horizon() * (1.0 + 1e-12)) throw std::domain_error("realize: T outside (0, horizon]");
  const Layout L{d, g_family.size()};

  std::vector<double> breaks;
  for (double t : path.times()) {
    if (t >= T) break;
    breaks.push_back(t);
  }
  for (const auto& s : model.scheduled)
    if (s.time > 0.0 && s.time < T) breaks.push_back(s.time);
  breaks.push_back(T);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  Vec acc(L.size(), 0.0);
  Vec db_sq(d * d, 0.0);  // running sum of Delta B Delta B^T
  const Vec zero_d(d, 0.0);
  const Vec zero_dd(d * d, 0.0);
  PathBuilder Bb(zero_d, T), Cb(zero_dd, T), Ctb(zero_dd, T), Vb(0.0, T);
  std::vector<PathBuilder> gb;
  for (std::size_t q = 0; q < g_family.size(); ++q) gb.emplace_back(0.0, T);

  auto sched = model.scheduled.begin();
  double a = 0.0;
  for (double b : breaks) {
    const auto x = path.eval(a);
    const double len = b - a;
    if (len > 0.0) {
      if (quadrature == Quadrature::left_point) {
        const Vec r = continuous_rate(L, model, a, x, g_family);
        for (std::size_t i = 0; i < L.size(); ++i) acc[i] += r[i] * len;
      } else {
        const int m = std::max(2, refinement + refinement % 2);
        const double h = len / m;
        for (int k = 0; k <= m; ++k) {
          const double w = (k == 0 || k == m) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
          const Vec r = continuous_rate(L, model, a + k * h, x, g_family);
          for (std::size_t i = 0; i < L.size(); ++i) acc[i] += r[i] * w * h / 3.0;
        }
      }
    }
    while (sched != model.scheduled.end() && sched->time < b) ++sched;
    if (sched != model.scheduled.end() && sched->time == b) {
      // Fixed time of discontinuity: Delta B = E h(J), Delta (int hh dnu) = E h h^T.
      Vec atom(L.size(), 0.0);
      add_jump_moments(L, model, sched->law(path.eval_left(b)), 1.0, g_family, atom);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) db_sq[i * d + j] += atom[L.b() + i] * atom[L.b() + j];
      atom[L.var()] = norm(std::span<const double>(atom.data() + L.b(), d));
      for (std::size_t i = 0; i < L.size(); ++i) acc[i] += atom[i];
      ++sched;
    }
    Vec ct(d * d);
    for (std::size_t i = 0; i < d * d; ++i) ct[i] = acc[L.c() + i] + acc[L.hh() + i] - db_sq[i];
    Bb.push(b, std::span<const double>(acc.data() + L.b(), d));
    Cb.push(b, std::span<const double>(acc.data() + L.c(), d * d));
    Ctb.push(b, ct);
    Vb.push(b, acc[L.var()]);
    for (std::size_t q = 0; q < g_family.size(); ++q) gb[q].push(b, acc[L.gs() + q]);
    a = b;
  }

  RealizedCharacteristics out;
  out.B = std::move(Bb).build();
  out.C = std::move(Cb).build();
  out.Ctilde = std::move(Ctb).build();
  out.B_variation = std::move(Vb).build();
  for (std::size_t q = 0; q < g_family.size(); ++q) {
    out.g_names.push_back(g_family[q].name);
    out.g_nu.push_back(std::move(gb[q]).build());
  }
  return out;
}

std::optional<double> stopping_T_m(const CadlagPath& path, double m) {
  if (!(m > 0.0)) throw std::invalid_argument("stopping_T_m: m must be positive");
  if (norm(path.initial_value()) >= m) return 0.0;
  // A left limit can only reach m after some value did, so the value test decides.
  for (std::size_t k = 1; k <= path.num_events(); ++k) {
    if (norm(path.value(k)) >= m) return path.event_time(k - 1);
  }
  return std::nullopt;
}

const Frequency& ComparisonReport::row(const std::string& name) const {
  for (const auto& r : rows)
    if (r.characteristic == name) return r;
  throw std::out_of_range("ComparisonReport: no row " + name);
}

ComparisonReport compare_characteristics(const SimOutput& sim, const CharacteristicsEvaluator& candidate, double t,
                                         double epsilon, std::optional<double> m,
                                         const std::vector<GFunction>& g_family, std::size_t threads) {
  if (!sim.model) throw std::invalid_argument("compare_characteristics: ensemble carries no generating model");
  if (!candidate.model) throw std::invalid_argument("compare_characteristics: candidate has no model");
  if (sim.paths.empty()) throw std::invalid_argument("compare_characteristics: empty ensemble");
  const std::size_t n = sim.paths.size();
  const std::size_t G = g_family.size();
  std::vector<std::vector<double>> hits(2 + G, std::vector<double>(n, 0.0));
  parallel_for(n, resolve_threads(threads), [&](std::size_t i) {
    const auto& path = sim.paths[i];
    double te = t;
    if (m) {
      if (auto stop = stopping_T_m(path, *m)) te = std::min(te, *stop);
    }
    if (!(te > 0.0)) return;
    const auto pre = realize(*sim.model, path, te, g_family, Quadrature::left_point);
    const auto cand = candidate(path, te, g_family);
    hits[0][i] = distance(pre.B.terminal_value(), cand.B.terminal_value()) >= epsilon ? 1.0 : 0.0;
    hits[1][i] = distance(pre.Ctilde.terminal_value(), cand.Ctilde.terminal_value()) >= epsilon ? 1.0 : 0.0;
    for (std::size_t q = 0; q < G; ++q)
      hits[2 + q][i] = std::abs(pre.g_nu[q].terminal_value()[0] - cand.g_nu[q].terminal_value()[0]) >= epsilon;
  });
  ComparisonReport rep;
  rep.t = t;
  rep.epsilon = epsilon;
  rep.n = n;
  auto freq = [n](const std::string& name, const std::vector<double>& h) {
    const double p = pairwise_sum(h) / static_cast<double>(n);
    return Frequency{name, p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
  };
  rep.rows.push_back(freq("B", hits[0]));
  rep.rows.push_back(freq("Ctilde", hits[1]));
  for (std::size_t q = 0; q < G; ++q) rep.rows.push_back(freq(g_family[q].name, hits[2 + q]));
  return rep;
}

PathFunctional characteristics_functional(const CharacteristicsEvaluator& candidate, double t,
                                          const std::vector<GFunction>& g_family) {
  return [candidate, t, g_family](const CadlagPath& path) {
    const auto rc = candidate(path, t, g_family);
    Vec out(rc.B.terminal_value().begin(), rc.B.terminal_value().end());
    const auto ct = rc.Ctilde.terminal_value();
    out.insert(out.end(), ct.begin(), ct.end());
    for (const auto& g : rc.g_nu) out.push_back(g.terminal_value()[0]);
    return out;
  };
}

std::vector<ModulusRow> local_uniform_continuity_probe(const PathFunctional& functional, const CadlagPath& base,
                                                       const std::vector<double>& scales, int draws,
                                                       std::uint64_t seed) {
  const Vec reference = functional(base);
  const std::size_t d = base.dim();
  const std::size_t rows = base.num_events() + 1;
  std::vector<ModulusRow> out;
  for (std::size_t s = 0; s < scales.size(); ++s) {
    const double delta = scales[s];
    double worst = 0.0;
    for (int k = 0; k < draws; ++k) {
      RandomStream rng(seed, s * static_cast<std::uint64_t>(draws) + static_cast<std::uint64_t>(k));
      std::vector<double> values;
      values.reserve(rows * d);
      for (std::size_t r = 0; r < rows; ++r)
        for (double v : base.value(r)) values.push_back(v + delta * (2.0 * rng.uniform() - 1.0));
      const CadlagPath perturbed(d, std::vector<double>(base.times().begin(), base.times().end()),
                                 std::move(values), base.horizon());
      worst = std::max(worst, distance(functional(perturbed), reference));
    }
    out.push_back({delta, worst});
  }
  return out;
}

std::vector<ModulusRow> j1_jitter_probe(const PathFunctional& functional, const CadlagPath& base,
                                        const std::vector<double>& scales, int draws, std::uint64_t seed) {
  const Vec reference = functional(base);
  const std::size_t d = base.dim();
  std::vector<double> values;
  for (std::size_t r = 0; r <= base.num_events(); ++r)
    for (double v : base.value(r)) values.push_back(v);
  std::vector<ModulusRow> out;
  for (std::size_t s = 0; s < scales.size(); ++s) {
    const double delta = scales[s];
    double worst = 0.0;
    for (int k = 0; k < draws; ++k) {
      RandomStream rng(seed ^ 0xA5A5A5A5ULL, s * static_cast<std::uint64_t>(draws) + static_cast<std::uint64_t>(k));
      std::vector<double> times(base.times().begin(), base.times().end());
      for (double& t : times) t += delta * (2.0 * rng.uniform() - 1.0);
      bool ok = true;
      double prev = 0.0;
      for (double t : times) {
        ok = ok && t > prev && t <= base.horizon();
        prev = t;
      }
      if (!ok) continue;
      const CadlagPath moved(d, std::move(times), values, base.horizon());
      worst = std::max(worst, distance(functional(moved), reference));
    }
    out.push_back({delta, worst});
  }
  return out;
}

}  // namespace mpmlab
