#include "mpmlab/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"

#include "mpmlab/parallel.hpp"
#include "mpmlab/random.hpp"
#include "mpmlab/skorokhod.hpp"
#include "mpmlab/tightness.hpp"

namespace mpmlab {

namespace {

using Json = nlohmann::ordered_json;
using Pairs = std::vector<std::pair<double, double>>;

constexpr const char* kSchema = "mpmlab.config/1";
constexpr std::uint64_t kDefaultSeed = 20240611;

const std::vector<ScenarioInfo> kScenarios = {
    {"donsker-sv", "invariance principle: scaled random walk, SV tests", "random walk n=400 against the Brownian generator",
     true},
    {"indicator-j1", "J1 vs uniform: indicators 1_[1-1/n,inf)", "closed-form J1 and uniform distances and F(w)=w(1-)",
     false},
    {"topology-coincidence", "J1 and uniform limits coincide on jump-control sets",
     "generated in-control sequences plus the out-of-control indicator", false},
    {"ek-ftd-chain", "martingale problem with fixed times of discontinuity: chain against Leb + atoms",
     "two-state chain, q = Leb + 0.5 d_1 + 0.5 d_2; measure and increment diagnostics", true},
    {"smg-brownian", "semimartingale characteristics: Brownian motion", "SMG_i / SMG_ii defects and [M,M] vs Ctilde",
     true},
    {"smg-compound-poisson", "semimartingale characteristics: compound Poisson",
     "rate 2, +-1 jumps; SMG_i / SMG_iii defects with ramp g", true},
    {"smg-scheduled", "semimartingale characteristics: fixed-time jumps", "Delta B = int h dnu({t}) at each atom", true},
    {"volterra-identity", "Volterra equation X = g0 + K * dZ", "K = 1 identity and the integrated kernel identity",
     true},
    {"characteristics-euler", "convergence of characteristics: Euler vs continuum candidate",
     "exceedance frequencies for B and Ctilde over grid steps 0.02, 0.01, 0.005", true},
    {"ui-diagnostic", "uniform integrability of test processes", "tail-excess curves for exponential and Pareto(1)",
     false},
};

// Scenario parameters: config values over defaults; unknown keys are errors.
class Params {
 public:
  Params(const std::string& id, const RunOptions& opts) : opts_(opts) {
    if (opts.config_path.empty()) return;
    std::ifstream in(opts.config_path);
    if (!in) throw UsageError("cannot open config " + opts.config_path);
    Json doc;
    try {
      doc = Json::parse(in);
    } catch (const Json::exception& e) {
      throw UsageError("malformed config " + opts.config_path + ": " + e.what());
    }
    if (!doc.is_object()) throw UsageError("config must be a JSON object");
    if (!doc.contains("schema") || doc["schema"] != kSchema)
      throw UsageError(std::string("config schema must be \"") + kSchema + "\"");
    for (const auto& [key, value] : doc.items()) {
      if (key == "schema") continue;
      if (key == "scenario") {
        if (value != id) throw UsageError("config is for scenario " + value.dump() + ", not " + id);
      } else if (key == "params") {
        if (!value.is_object()) throw UsageError("config: params must be an object");
        params_ = value;
      } else {
        throw UsageError("config: unknown field '" + key + "'");
      }
    }
  }

  double num(const std::string& key, double def) {
    const Json* v = find(key);
    if (!v) return def;
    if (!v->is_number()) throw UsageError("config: " + key + " must be a number");
    return v->get<double>();
  }

  std::size_t count(const std::string& key, std::size_t def) {
    const Json* v = find(key);
    if (!v) return def;
    if (!v->is_number_unsigned() || v->get<std::size_t>() == 0)
      throw UsageError("config: " + key + " must be a positive integer");
    return v->get<std::size_t>();
  }

  std::string str(const std::string& key, const std::string& def) {
    const Json* v = find(key);
    if (!v) return def;
    if (!v->is_string()) throw UsageError("config: " + key + " must be a string");
    return v->get<std::string>();
  }

  std::vector<double> list(const std::string& key, std::vector<double> def) {
    const Json* v = find(key);
    if (!v) return def;
    try {
      return v->get<std::vector<double>>();
    } catch (const Json::exception&) {
      throw UsageError("config: " + key + " must be an array of numbers");
    }
  }

  Pairs pairs(const std::string& key, Pairs def) {
    const Json* v = find(key);
    if (!v) return def;
    Pairs out;
    try {
      for (const auto& p : v->get<std::vector<std::vector<double>>>()) {
        if (p.size() != 2) throw UsageError("config: " + key + " entries must be [s, t]");
        out.emplace_back(p[0], p[1]);
      }
    } catch (const Json::exception&) {
      throw UsageError("config: " + key + " must be an array of [s, t] pairs");
    }
    return out;
  }

  std::uint64_t seed() {
    if (opts_.seed) {
      used_.insert("seed");
      return *opts_.seed;
    }
    const Json* v = find("seed");
    if (!v) return kDefaultSeed;
    if (!v->is_number_unsigned()) throw UsageError("config: seed must be a nonnegative integer");
    return v->get<std::uint64_t>();
  }

  void finish() const {
    for (const auto& [key, value] : params_.items())
      if (!used_.count(key)) throw UsageError("config: unknown parameter '" + key + "'");
  }

 private:
  const Json* find(const std::string& key) {
    used_.insert(key);
    auto it = params_.find(key);
    return it == params_.end() ? nullptr : &*it;
  }

  const RunOptions& opts_;
  Json params_ = Json::object();
  std::set<std::string> used_;
};

void check_pairs(const Pairs& pairs, double horizon) {
  for (const auto& [s, t] : pairs)
    if (!(0.0 <= s && s < t && t <= horizon)) throw UsageError(fmt::format("pair ({}, {}) not in [0, horizon]", s, t));
}

EnsembleConfig ensemble_config(std::size_t n_paths, double step, double horizon, std::uint64_t seed,
                               std::size_t threads) {
  EnsembleConfig cfg;
  cfg.n_paths = n_paths;
  cfg.grid_step = step;
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.threads = threads;
  return cfg;
}

std::string num(double x) { return format_double(x); }

// Counts the defect failures in `reports` against an allowance.
Check defect_check(const std::string& name, const std::vector<DefectReport>& reports, std::size_t allowance) {
  std::size_t failures = 0;
  for (const auto& r : reports)
    if (!r.pass) ++failures;
  Check c{name, failures <= allowance, true,
          fmt::format("{} of {} outside 3 SE (allowance {})", failures, reports.size(), allowance)};
  return c;
}

std::vector<DefectReport> select(const std::vector<DefectReport>& all, const PreparedScenario& p, Family family) {
  std::vector<DefectReport> out;
  const std::size_t per_test = all.size() / std::max<std::size_t>(1, p.tests.size());
  for (std::size_t i = 0; i < p.tests.size(); ++i)
    if (p.tests[i].family == family)
      for (std::size_t k = 0; k < per_test; ++k) out.push_back(all[i * per_test + k]);
  return out;
}

// ----- ensemble-bearing scenarios -------------------------------------------

PreparedScenario prepare_donsker(Params& params, const RunOptions& opts) {
  PreparedScenario p;
  p.seed = params.seed();
  const int n = static_cast<int>(params.count("n", 400));
  const std::size_t paths = params.count("n_paths", 10000);
  const double horizon = params.num("horizon", 1.0);
  p.pairs = params.pairs("pairs", {{0.25, 0.5}, {0.5, 0.75}, {0.5, 1.0}});
  p.zfun = params.str("zfun", "pointwise:tanh@0.5s,cos@1s");
  check_pairs(p.pairs, horizon);
  p.ensemble = simulate_random_walk(n, ensemble_config(paths, 1.0 / n, horizon, p.seed, opts.threads));
  auto unit = [](double, std::span<const double>) { return Vec{1.0}; };
  for (const auto& f : {identity_function(), square_function(), cosine_function()})
    p.tests.push_back(build_sv_test(f, nullptr, unit));
  return p;
}

struct ChainSetup {
  std::vector<double> generator{-1.0, 1.0, 2.0, -2.0};
  LocallyFiniteMeasure q = LocallyFiniteMeasure::mixed(1.0, {{1.0, 0.5}, {2.0, 0.5}}, 2.5);
};

// (Lambda f)(i) = sum_j Lambda_ij f(j) on the chain's states.
ScalarFn chain_generator_of(const std::vector<double>& lambda, std::size_t states, const ScalarFn& f) {
  std::vector<double> lf(states, 0.0);
  for (std::size_t i = 0; i < states; ++i)
    for (std::size_t j = 0; j < states; ++j) lf[i] += lambda[i * states + j] * f(Vec{static_cast<double>(j)});
  return [lf](std::span<const double> x) { return lf.at(static_cast<std::size_t>(std::lround(x[0]))); };
}

double sup_on_states(std::size_t states, const ScalarFn& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < states; ++i) s = std::max(s, std::abs(f(Vec{static_cast<double>(i)})));
  return s;
}

PreparedScenario prepare_chain(Params& params, const RunOptions& opts) {
  PreparedScenario p;
  p.seed = params.seed();
  const std::size_t paths = params.count("n_paths", 10000);
  p.pairs = params.pairs("pairs", {{0.5, 1.0}, {1.0, 1.5}, {0.5, 2.0}, {1.5, 2.5}});
  p.zfun = params.str("zfun", "pointwise:cos@1s");
  const ChainSetup chain;
  check_pairs(p.pairs, chain.q.horizon());
  p.q = chain.q;
  p.ensemble = simulate_ek_ftd_chain(2, chain.generator, chain.q,
                                     ensemble_config(paths, 0.5, chain.q.horizon(), p.seed, opts.threads));
  const std::vector<std::pair<std::string, ScalarFn>> fs = {
      {"state", [](std::span<const double> x) { return x[0]; }},
      {"exp", [](std::span<const double> x) { return std::exp(-x[0]); }},
  };
  for (const auto& [name, f] : fs) {
    const ScalarFn lf = chain_generator_of(chain.generator, 2, f);
    auto y = build_ek_ftd_test(f, lf, chain.q, sup_on_states(2, f), sup_on_states(2, lf));
    y.label = "EK_FTD[" + name + "]";
    p.tests.push_back(std::move(y));
  }
  return p;
}

PreparedScenario prepare_smg(const std::string& id, Params& params, const RunOptions& opts) {
  PreparedScenario p;
  p.seed = params.seed();
  const std::size_t paths = params.count("n_paths", 10000);
  const double step = params.num("grid_step", 0.01);
  const double horizon = params.num("horizon", 1.0);
  p.pairs = params.pairs("pairs", {{0.25, 0.5}, {0.5, 1.0}});
  p.zfun = params.str("zfun", "pointwise:tanh@1s");
  check_pairs(p.pairs, horizon);
  const auto cfg = ensemble_config(paths, step, horizon, p.seed, opts.threads);
  std::shared_ptr<const CharModel> model;
  std::vector<GFunction> g;
  if (id == "smg-brownian") {
    model = std::make_shared<const CharModel>(brownian_model(0.0, 1.0));
    p.ensemble = simulate_ito(model, cfg);
  } else if (id == "smg-compound-poisson") {
    model = std::make_shared<const CharModel>(
        compound_poisson_model(params.num("rate", 2.0), JumpLaw::symmetric(1.0), 1.0));
    g = ramp_family(static_cast<int>(params.count("ramp_levels", 3)));
    p.ensemble = simulate_jump_diffusion(model, cfg);
  } else {
    JumpLaw mixed_law{{Vec{0.5}, Vec{2.0}}, {0.5, 0.5}};
    model = std::make_shared<const CharModel>(
        scheduled_jump_model({{0.5, JumpLaw::symmetric(0.25)}, {1.0, mixed_law}}, 1.0));
    p.ensemble = simulate_jump_diffusion(model, cfg);
  }
  p.tests = build_smg_tests(model, g);
  p.candidate = CharacteristicsEvaluator{model, Quadrature::left_point, 16};
  return p;
}

VolterraModel volterra_model(std::size_t steps, double step, bool unit_kernel, double decay) {
  VolterraModel m;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) * step;
    m.g0.push_back(Vec{std::sin(t)});
    m.kernel.push_back(Vec{unit_kernel ? 1.0 : std::exp(-decay * t)});
  }
  m.drift = [](std::span<const double> x) { return Vec{-0.5 * x[0]}; };
  m.covariance = [](std::span<const double> x) {
    const double th = std::tanh(x[0]);
    return Vec{1.0 + 0.5 * th * th};
  };
  m.intensity = [](std::span<const double>) { return 1.0; };
  m.jump_law = [](std::span<const double>) { return JumpLaw::symmetric(0.3); };
  return m;
}

PreparedScenario prepare_volterra(Params& params, const RunOptions& opts) {
  PreparedScenario p;
  p.seed = params.seed();
  const std::size_t paths = params.count("n_paths", 10000);
  const double step = params.num("grid_step", 0.01);
  const double decay = params.num("decay", 2.0);
  p.pairs = params.pairs("pairs", {{0.25, 0.5}, {0.5, 1.0}});
  p.zfun = params.str("zfun", "pointwise:tanh@1s");
  check_pairs(p.pairs, 1.0);
  const auto cfg = ensemble_config(paths, step, 1.0, p.seed, opts.threads);
  const VolterraModel model = volterra_model(cfg.steps(), step, false, decay);
  p.ensemble = simulate_volterra(model, cfg);
  p.tests.push_back(build_volterra_test(identity_function(), model));
  p.tests.push_back(build_volterra_test(square_function(), model));
  return p;
}

std::shared_ptr<const CharModel> euler_model(double drift_scale, double vol_scale) {
  CharModel m;
  m.name = "time-modulated jump diffusion";
  m.drift = [drift_scale](double t, std::span<const double> x) {
    return Vec{drift_scale * std::cos(2.0 * M_PI * t) * x[0]};
  };
  m.diffusion = [vol_scale](double t, std::span<const double> x) {
    return Vec{1.0 + vol_scale * std::cos(2.0 * M_PI * t) * x[0]};
  };
  m.intensity = [](double, std::span<const double>) { return 1.0; };
  m.jump_law = [](double, std::span<const double>) { return JumpLaw::symmetric(0.5); };
  return std::make_shared<const CharModel>(std::move(m));
}

PreparedScenario prepare_euler(Params& params, const RunOptions& opts, double step) {
  PreparedScenario p;
  p.seed = params.seed();
  const std::size_t paths = params.count("n_paths", 2000);
  const auto model = euler_model(params.num("drift_scale", 6.0), params.num("vol_scale", 1.5));
  p.ensemble = simulate_jump_diffusion(model, ensemble_config(paths, step, 1.0, p.seed, opts.threads));
  p.candidate = CharacteristicsEvaluator{model, Quadrature::refined, 16};
  p.pairs = params.pairs("pairs", {{0.25, 0.5}, {0.5, 1.0}});
  p.zfun = params.str("zfun", "pointwise:tanh@1s");
  p.tests = build_smg_tests(model, {});
  return p;
}

PreparedScenario prepare_with(const std::string& id, Params& params, const RunOptions& opts) {
  PreparedScenario p;
  if (id == "donsker-sv") {
    p = prepare_donsker(params, opts);
  } else if (id == "ek-ftd-chain") {
    p = prepare_chain(params, opts);
  } else if (id == "smg-brownian" || id == "smg-compound-poisson" || id == "smg-scheduled") {
    p = prepare_smg(id, params, opts);
  } else if (id == "volterra-identity") {
    p = prepare_volterra(params, opts);
  } else if (id == "characteristics-euler") {
    const auto steps = params.list("grid_steps", {0.02, 0.01, 0.005});
    if (steps.empty()) throw UsageError("config: grid_steps must be nonempty");
    p = prepare_euler(params, opts, steps.back());
  } else {
    throw UsageError("scenario " + id + " has no ensemble");
  }
  p.id = id;
  return p;
}

// ----- runners ---------------------------------------------------------------

class Runner {
 public:
  Runner(const std::string& id, const RunOptions& opts) : opts_(opts), params_(id, opts) {
    result_.id = id;
    dir_ = std::filesystem::path(opts.out_dir) / id;
    std::filesystem::create_directories(dir_);
  }

  Params& params() { return params_; }
  ScenarioResult& result() { return result_; }

  void write(const std::string& name, const CsvTable& table) {
    table.write((dir_ / name).string());
    result_.files.push_back(name);
  }

  void check(std::string name, bool pass, std::string detail, bool expected = true) {
    result_.checks.push_back({std::move(name), pass, expected, std::move(detail)});
  }
  void check(Check c) { result_.checks.push_back(std::move(c)); }

  ScenarioResult finish() {
    params_.finish();
    Json summary;
    summary["scenario"] = result_.id;
    summary["seed"] = result_.seed;
    summary["ok"] = result_.ok();
    Json checks = Json::array();
    for (const auto& c : result_.checks)
      checks.push_back({{"name", c.name}, {"pass", c.pass}, {"expected", c.expected}, {"detail", c.detail}});
    summary["checks"] = checks;
    summary["files"] = result_.files;
    std::ofstream out(dir_ / "summary.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write summary.json");
    out << summary.dump(2) << '\n';
    return result_;
  }

  const RunOptions& opts() const { return opts_; }

 private:
  const RunOptions& opts_;
  Params params_;
  ScenarioResult result_;
  std::filesystem::path dir_;
};

void run_defects(Runner& r, const PreparedScenario& p, std::vector<DefectReport>& reports) {
  r.write("defect.csv", defect_table(p, p.pairs, p.zfun, r.opts().threads, &reports));
}

void run_donsker(Runner& r) {
  const auto p = prepare_donsker(r.params(), r.opts());
  r.result().seed = p.seed;
  const std::size_t allowance = r.params().count("bonferroni_allowance", 1);
  std::vector<DefectReport> reports;
  run_defects(r, p, reports);
  r.check(defect_check("sv-defects", reports, allowance));
}

void run_indicator(Runner& r) {
  auto& params = r.params();
  r.result().seed = params.seed();
  const auto ns = params.list("n", {2, 4, 8, 16});
  const double T = 2.0;
  const CadlagPath limit = CadlagPath::indicator(1.0, T);
  const auto delta_1 = LocallyFiniteMeasure::atomic({{1.0, 1.0}}, T);
  const auto left_value = [&](const CadlagPath& w, double t) {
    return integrate_left(w, delta_1, t, [](std::span<const double> x) { return x[0]; });
  };
  CsvTable dist({"n", "j1", "uniform", "j1_expected"});
  CsvTable func({"path", "t", "value", "expected"});
  bool dist_ok = true;
  bool func_ok = true;
  const std::vector<double> ts{0.5, 0.99, 1.0, 1.5, 2.0};
  for (double n : ns) {
    if (!(n >= 1.0)) throw UsageError("config: n entries must be >= 1");
    const CadlagPath w = CadlagPath::indicator(1.0 - 1.0 / n, T);
    const double j1 = j1_distance(w, limit, T).distance;
    const double un = uniform_distance(w, limit, T);
    dist.add(n, j1, un, 1.0 / n);
    dist_ok = dist_ok && std::abs(j1 - 1.0 / n) <= 1e-12 && std::abs(un - 1.0) <= 1e-12;
    for (double t : ts) {
      const double v = left_value(w, t);
      const double expected = t >= 1.0 ? 1.0 : 0.0;
      func.add(fmt::format("n={}", n), t, v, expected);
      func_ok = func_ok && std::abs(v - expected) <= 1e-12;
    }
  }
  for (double t : ts) {
    const double v = left_value(limit, t);
    func.add("limit", t, v, 0.0);
    func_ok = func_ok && std::abs(v) <= 1e-12;
  }
  r.write("distances.csv", dist);
  r.write("functional.csv", func);
  r.check("closed-form-distances", dist_ok, "j1 = 1/n, uniform = 1");
  r.check("left-limit-functional", func_ok, "w(1-) = 1 on pre-limit paths, 0 on the limit, for t >= 1");
}

// Step path on [0, T] with big jumps at the major times and small jumps on a
// fine grid, all inside the returned control.
struct ControlledFamily {
  JumpControl ctrl;
  std::vector<double> major;
  std::vector<double> minor;
  double minor_level;
};

ControlledFamily controlled_family(double T) {
  ControlledFamily f;
  f.major = {0.4, 0.9, 1.3};
  f.minor_level = std::ldexp(1.0, -8);
  std::vector<Atom> u;
  for (int k = 1; k < 64 * static_cast<int>(T); ++k) {
    const double t = k / 64.0;
    const bool is_major = std::find(f.major.begin(), f.major.end(), t) != f.major.end();
    if (!is_major) f.minor.push_back(t);
  }
  std::set<double> all(f.minor.begin(), f.minor.end());
  all.insert(f.major.begin(), f.major.end());
  for (double t : all) {
    const bool is_major = std::find(f.major.begin(), f.major.end(), t) != f.major.end();
    u.push_back({t, is_major ? 1.0 : f.minor_level});
  }
  f.ctrl = JumpControl{std::move(u), Kappa::constant(1.0), Vec{0.0}};
  return f;
}

void run_topology(Runner& r) {
  auto& params = r.params();
  r.result().seed = params.seed();
  const std::size_t sequences = params.count("n_sequences", 100);
  const std::size_t length = params.count("sequence_length", 8);
  const double j1_tol = params.num("j1_tolerance", 1e-3);
  const double uniform_tol = params.num("uniform_tolerance", 1e-2);
  const double T = 2.0;
  const auto fam = controlled_family(T);

  CsvTable table({"sequence", "final_j1", "final_uniform", "precondition_ok", "coincide"});
  bool all_ok = true;
  double worst_j1 = 0.0;
  for (std::size_t s = 0; s < sequences; ++s) {
    RandomStream rng(r.result().seed, s);
    std::map<double, double> jumps;
    for (double t : fam.major) jumps[t] = rng.uniform() - 0.5;
    for (double t : fam.minor)
      if (rng.bernoulli(0.25)) jumps[t] = (rng.uniform() - 0.5) * fam.minor_level;
    auto build = [&](double amplitude, RandomStream& noise) {
      PathBuilder b(0.0, T);
      double level = 0.0;
      for (const auto& [t, dx] : jumps) {
        level += dx;
        b.push(t, level + amplitude * (2.0 * noise.uniform() - 1.0));
      }
      return std::move(b).build();
    };
    RandomStream none(0, 0);
    const CadlagPath limit = build(0.0, none);
    std::vector<CadlagPath> seq;
    for (std::size_t n = 1; n <= length; ++n) {
      RandomStream noise(r.result().seed, 1000000 + s * 1000 + n);
      seq.push_back(build(std::ldexp(1.0, -10 - static_cast<int>(n)), noise));
    }
    const auto rep = coincidence_check(seq, limit, fam.ctrl, T, {j1_tol, uniform_tol, false});
    const bool driven = rep.j1_distances.back() < j1_tol;
    worst_j1 = std::max(worst_j1, rep.j1_distances.back());
    all_ok = all_ok && rep.precondition_ok && rep.coincide && driven &&
             rep.uniform_distances.back() < uniform_tol;
    table.add(s, rep.j1_distances.back(), rep.uniform_distances.back(), rep.precondition_ok, rep.coincide);
  }
  r.write("coincidence.csv", table);
  r.check("in-control-coincidence", all_ok, fmt::format("{} sequences, worst final j1 {}", sequences, num(worst_j1)));

  // Out of control: indicators whose jump moves towards 1.
  const CadlagPath limit = CadlagPath::indicator(1.0, T);
  std::vector<CadlagPath> seq;
  for (double n : {2.0, 4.0, 8.0, 16.0}) seq.push_back(CadlagPath::indicator(1.0 - 1.0 / n, T));
  const JumpControl at_one{{{1.0, 1.0}}, Kappa::constant(1.0), Vec{0.0}};
  const auto rep = coincidence_check(seq, limit, at_one, T, {1.0 / 16.0, 1e-2, true});
  CsvTable out({"n", "j1", "uniform"});
  for (std::size_t k = 0; k < seq.size(); ++k) out.add(std::ldexp(1.0, 1 + static_cast<int>(k)), rep.j1_distances[k],
                                                      rep.uniform_distances[k]);
  r.write("indicator.csv", out);
  r.check("indicator-outside-control", !rep.precondition_ok && rep.j1_distances.back() <= 1.0 / 16.0 + 1e-12 &&
                                           rep.uniform_distances.back() == 1.0,
          fmt::format("final j1 {}, uniform {}", num(rep.j1_distances.back()), num(rep.uniform_distances.back())));
  r.check("indicator-coincidence", rep.coincide, "j1 small does not force uniform small", false);
}

void run_chain(Runner& r) {
  auto p = prepare_chain(r.params(), r.opts());
  r.result().seed = p.seed;
  std::vector<DefectReport> reports;
  run_defects(r, p, reports);
  r.check(defect_check("ek-ftd-defects", reports, 0));

  const ChainSetup chain;
  const double T = chain.q.horizon();
  const auto grid = dyadic_grid(T, static_cast<int>(r.params().count("grid_level", 12)), &chain.q);
  std::vector<LocallyFiniteMeasure> seq;
  std::vector<int> ns;
  for (int k = 2; k <= 10; ++k) {
    ns.push_back(1 << k);
    seq.push_back(LocallyFiniteMeasure::discretized_lebesgue(1.0, 1 << k, chain.q.atoms(), T));
  }
  const double tol = r.params().num("measure_tolerance", 1e-2);
  const auto conv = measure_j1_convergence(seq, chain.q, T, grid, tol);
  std::vector<LocallyFiniteMeasure> split;
  for (int n : ns) split.push_back(LocallyFiniteMeasure::atomic({{1.0 - 1.0 / n, 0.5}, {1.0 + 1.0 / n, 0.5}}, T));
  const auto delta_1 = LocallyFiniteMeasure::atomic({{1.0, 1.0}}, T);
  const auto split_rep = measure_j1_convergence(split, delta_1, T, dyadic_grid(T, 12, &delta_1), tol);
  CsvTable mt({"sequence", "n", "cdf_gap", "atom_square_gap"});
  for (std::size_t k = 0; k < ns.size(); ++k) {
    mt.add("discretized", ns[k], conv.cdf_gaps[k], conv.atom_square_gaps[k]);
    mt.add("split-atom", ns[k], split_rep.cdf_gaps[k], split_rep.atom_square_gaps[k]);
  }
  r.write("measure.csv", mt);
  r.check("discretized-measure-convergence", conv.pass,
          fmt::format("cdf gap {}, atom-square gap {}", num(conv.cdf_gap), num(conv.atom_square_gap)));
  r.check("split-atom-convergence", split_rep.pass,
          fmt::format("atom-square gap {}", num(split_rep.atom_square_gap)), false);
  r.check("split-atom-gap", split_rep.atom_square_gap == 0.5, "atom-square gap is exactly 1/2");

  const ScalarFn f = [](std::span<const double> x) { return x[0]; };
  const ScalarFn f2 = [](std::span<const double> x) { return x[0] * x[0]; };
  const double C = sup_on_states(2, chain_generator_of(chain.generator, 2, f2)) +
                   2.0 * sup_on_states(2, f) * sup_on_states(2, chain_generator_of(chain.generator, 2, f));
  Pairs pairs;
  for (int k = 0; k < 10; ++k) pairs.emplace_back(0.2 * k, 0.2 * k + 0.45);
  const auto rows = conditional_increment_bound(p.ensemble, f, C, chain.q, 10.0, pairs, r.opts().threads);
  CsvTable it({"s", "t", "lhs", "se", "bound", "flagged"});
  std::size_t flags = 0;
  for (const auto& row : rows) {
    it.add(row.s, row.t, row.lhs, row.std_error, row.bound, row.flagged);
    flags += row.flagged ? 1 : 0;
  }
  r.write("increment.csv", it);
  r.check("increment-bound", flags == 0, fmt::format("{} of {} pairs flagged, C = {}", flags, rows.size(), num(C)));

  const auto cc = compact_containment(p.ensemble, T, 1.0, r.opts().threads);
  CsvTable ct({"T", "K", "probability", "se", "n"});
  ct.add(T, 1.0, cc.probability, cc.std_error, cc.n);
  r.write("containment.csv", ct);
  r.check("containment", cc.probability == 1.0, "chain stays in {0, 1}");
}

void run_smg(Runner& r) {
  const std::string& id = r.result().id;
  auto p = prepare_smg(id, r.params(), r.opts());
  r.result().seed = p.seed;
  std::vector<DefectReport> reports;
  run_defects(r, p, reports);
  const auto& model = *p.candidate->model;

  if (id == "smg-brownian" || id == "smg-compound-poisson") {
    for (Family fam : {Family::SMG_i, Family::SMG_ii, Family::SMG_iii}) {
      const auto sel = select(reports, p, fam);
      if (!sel.empty()) r.check(defect_check(std::string(family_name(fam)) + "-defects", sel, 0));
    }
    const double t = r.params().num("qv_time", 1.0);
    // B = 0 for both models, so [M, M] is the sum of squared truncated increments.
    std::vector<double> qv(p.ensemble.size());
    parallel_for(qv.size(), resolve_threads(r.opts().threads), [&](std::size_t i) {
      double s = 0.0;
      for (const auto& j : p.ensemble.paths[i].jumps(t)) {
        const double d = model.truncation.apply(j.delta)[0];
        s += d * d;
      }
      qv[i] = s;
    });
    const MeanSe ms = mean_and_se(qv);
    const double ctilde = realize(model, p.ensemble.paths.front(), t).Ctilde.terminal_value()[0];
    CsvTable qt({"t", "mean_qv", "se", "ctilde", "n"});
    qt.add(t, ms.mean, ms.std_error, ctilde, ms.n);
    r.write("quadratic_variation.csv", qt);
    r.check("qv-vs-ctilde", std::abs(ms.mean - ctilde) <= 3.0 * ms.std_error,
            fmt::format("mean [M,M] {} vs Ctilde {} (se {})", num(ms.mean), num(ctilde), num(ms.std_error)));
  } else {
    r.check(defect_check("SMG_i-defects", select(reports, p, Family::SMG_i), 0));
    // Delta B at each scheduled atom against int h dnu({t}) computed from the law.
    CsvTable at({"path", "time", "delta_B", "int_h_dnu"});
    bool exact = true;
    const std::size_t shown = std::min<std::size_t>(p.ensemble.size(), 200);
    for (std::size_t i = 0; i < shown; ++i) {
      const auto& path = p.ensemble.paths[i];
      const auto rc = realize(model, path, path.horizon());
      for (const auto& s : model.scheduled) {
        const auto left = path.eval_left(s.time);
        const JumpLaw law = s.law(left);
        double expected = 0.0;
        for (std::size_t k = 0; k < law.sizes.size(); ++k) {
          const double x = law.sizes[k][0];
          expected += law.probs[k] * std::clamp(x, -model.truncation.radius, model.truncation.radius);
        }
        const double dB = rc.B.eval(s.time)[0] - rc.B.eval_left(s.time)[0];
        exact = exact && std::abs(dB - expected) <= 1e-15;
        if (i < 5) at.add(i, s.time, dB, expected);
      }
    }
    r.write("atoms.csv", at);
    r.check("delta-B-at-atoms", exact, fmt::format("checked {} paths", shown));
  }
}

void run_volterra(Runner& r) {
  auto p = prepare_volterra(r.params(), r.opts());
  r.result().seed = p.seed;
  std::vector<DefectReport> reports;
  run_defects(r, p, reports);
  r.check(defect_check("volterra-defects", reports, 0));

  const double step = p.ensemble.grid_step;
  const std::size_t steps = static_cast<std::size_t>(std::lround(1.0 / step));
  const std::size_t n_id = std::min<std::size_t>(p.ensemble.size(), 200);

  // K = 1: X - g0 - Z vanishes at every grid point.
  auto cfg = ensemble_config(n_id, step, 1.0, p.seed, r.opts().threads);
  const auto unit = simulate_volterra(volterra_model(steps, step, true, 0.0), cfg);
  double worst_unit = 0.0;
  for (std::size_t i = 0; i < unit.size(); ++i)
    for (std::size_t k = 0; k <= steps; ++k) {
      const double t = static_cast<double>(k) * step;
      worst_unit = std::max(worst_unit, std::abs(unit.paths[i].value(k)[0] - std::sin(t) -
                                                 unit.drivers[i].eval(t)[0]));
    }
  r.check("unit-kernel-identity", worst_unit <= 1e-12, fmt::format("max |X - g0 - Z| = {}", num(worst_unit)));

  // Decaying kernel: int X = int g0 + int K(t - s) Z_s ds, by left-point sums.
  const double decay = 2.0;
  CsvTable it({"path", "t", "lhs", "rhs", "tolerance"});
  bool ok = true;
  for (std::size_t i = 0; i < n_id; ++i) {
    const auto& x = p.ensemble.paths[i];
    const auto& z = p.ensemble.drivers[i];
    const double sup = std::max({1.0, x.running_sup(1.0), z.running_sup(1.0)});
    for (double t : {0.5, 1.0}) {
      const auto m = static_cast<std::size_t>(std::lround(t / step));
      double lhs = 0.0;
      double rhs = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double s = static_cast<double>(k) * step;
        lhs += x.value(k)[0] * step;
        rhs += (std::sin(s) + std::exp(-decay * (t - s)) * z.value(k)[0]) * step;
      }
      const double tol = 5.0 * step * sup;
      ok = ok && std::abs(lhs - rhs) <= tol;
      if (i < 10) it.add(i, t, lhs, rhs, tol);
    }
  }
  r.write("integrated_identity.csv", it);
  r.check("integrated-kernel-identity", ok, fmt::format("checked {} paths at t = 0.5, 1", n_id));
}

void run_euler(Runner& r) {
  auto& params = r.params();
  const auto steps = params.list("grid_steps", {0.02, 0.01, 0.005});
  const double t = params.num("t", 1.0);
  const double eps = params.num("epsilon", 0.05);
  const double limit = params.num("frequency_limit", 0.05);
  CsvTable table({"grid_step", "characteristic", "t", "epsilon", "frequency", "se", "n"});
  std::vector<double> fb;
  std::vector<double> fc;
  for (double step : steps) {
    const auto p = prepare_euler(params, r.opts(), step);
    r.result().seed = p.seed;
    const auto rep = compare_characteristics(p.ensemble, *p.candidate, t, eps, std::nullopt, {}, r.opts().threads);
    for (const auto& row : rep.rows) table.add(step, row.characteristic, t, eps, row.frequency, row.std_error, rep.n);
    fb.push_back(rep.row("B").frequency);
    fc.push_back(rep.row("Ctilde").frequency);
    if (step == steps.back()) {
      const CharacteristicsEvaluator same{p.ensemble.model, Quadrature::left_point, 16};
      const auto self = compare_characteristics(p.ensemble, same, t, eps, std::nullopt, {}, r.opts().threads);
      bool zero = true;
      for (const auto& row : self.rows) zero = zero && row.frequency == 0.0;
      r.check("self-comparison-zero", zero, "generating model as candidate");
    }
  }
  r.write("comparison.csv", table);
  auto monotone = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] > v[i - 1]) return false;
    return true;
  };
  r.check("B-frequency", monotone(fb) && fb.back() < limit,
          fmt::format("frequencies {}", fmt::join(fb, ", ")));
  r.check("Ctilde-frequency", monotone(fc) && fc.back() < limit,
          fmt::format("frequencies {}", fmt::join(fc, ", ")));
}

void run_ui(Runner& r) {
  auto& params = r.params();
  r.result().seed = params.seed();
  const std::size_t n = params.count("n", 100000);
  const auto z_grid = params.list("z", {1.0, 2.0, 5.0, 10.0});
  const double threshold = params.num("threshold", 0.01);
  // Blocks of 1000 draws per stream keep the sample independent of threads.
  const std::size_t block = 1000;
  auto sample = [&](std::uint64_t salt, auto draw) {
    std::vector<double> xs(n);
    const std::size_t blocks = (n + block - 1) / block;
    parallel_for(blocks, resolve_threads(r.opts().threads), [&](std::size_t b) {
      RandomStream rng(stream_seed(r.result().seed, salt), b);
      for (std::size_t i = b * block; i < std::min(n, (b + 1) * block); ++i) xs[i] = draw(rng);
    });
    return xs;
  };
  const auto expo = sample(1, [](RandomStream& rng) { return rng.exponential(1.0); });
  const auto pareto = sample(2, [](RandomStream& rng) { return 1.0 / rng.uniform_open0(); });
  const auto ue = ui_diagnostic(expo, z_grid, threshold);
  const auto up = ui_diagnostic(pareto, z_grid, threshold);
  CsvTable table({"family", "z", "excess"});
  for (std::size_t k = 0; k < ue.z.size(); ++k) table.add("exponential", ue.z[k], ue.excess[k]);
  for (std::size_t k = 0; k < up.z.size(); ++k) table.add("pareto1", up.z[k], up.excess[k]);
  r.write("tail_excess.csv", table);
  r.check("exponential-ui", !ue.suspect && ue.excess.back() < 0.01,
          fmt::format("excess at z = {}: {}", num(ue.z.back()), num(ue.excess.back())));
  r.check("pareto-flagged", up.suspect && up.excess.back() > 0.5,
          fmt::format("excess at z = {}: {}", num(up.z.back()), num(up.excess.back())));
}

}  // namespace

bool ScenarioResult::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok(); });
}

const std::vector<ScenarioInfo>& list_scenarios() { return kScenarios; }

const ScenarioInfo& find_scenario(const std::string& id) {
  for (const auto& s : kScenarios)
    if (s.id == id) return s;
  throw UsageError("unknown scenario '" + id + "'");
}

PreparedScenario prepare_scenario(const std::string& id, const RunOptions& opts) {
  find_scenario(id);
  Params params(id, opts);
  auto p = prepare_with(id, params, opts);
  return p;
}

CsvTable defect_table(const PreparedScenario& prepared, const std::vector<std::pair<double, double>>& pairs,
                      const std::string& zfun, std::size_t threads, std::vector<DefectReport>* reports) {
  CsvTable table({"test", "s", "t", "estimate", "se", "n", "pass"});
  for (const auto& y : prepared.tests) {
    for (const auto& [s, t] : pairs) {
      DeterminingFunction z;
      try {
        z = parse_determining_function(zfun, s);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const auto rep = defect_statistic(prepared.ensemble, y, z, s, t, 3.0, threads);
      table.add(y.label, s, t, rep.estimate, rep.std_error, rep.n, rep.pass);
      if (reports) reports->push_back(rep);
    }
  }
  return table;
}

ScenarioResult run_scenario(const std::string& id, const RunOptions& opts) {
  find_scenario(id);
  Runner r(id, opts);
  if (id == "donsker-sv") {
    run_donsker(r);
  } else if (id == "indicator-j1") {
    run_indicator(r);
  } else if (id == "topology-coincidence") {
    run_topology(r);
  } else if (id == "ek-ftd-chain") {
    run_chain(r);
  } else if (id == "smg-brownian" || id == "smg-compound-poisson" || id == "smg-scheduled") {
    run_smg(r);
  } else if (id == "volterra-identity") {
    run_volterra(r);
  } else if (id == "characteristics-euler") {
    run_euler(r);
  } else if (id == "ui-diagnostic") {
    run_ui(r);
  }
  return r.finish();
}

}  // namespace mpmlab
