// mpmlab command-line driver.
//
// Exit codes: 0 success, 1 a check failed, 2 usage error.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mpmlab/characteristics.hpp"
#include "mpmlab/io.hpp"
#include "mpmlab/scenario.hpp"
#include "mpmlab/skorokhod.hpp"
#include "mpmlab/tightness.hpp"

namespace {

using namespace mpmlab;

constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::size_t threads = 0;

  RunOptions options() const {
    RunOptions o;
    o.seed = seed;
    o.threads = threads;
    o.out_dir = out_dir;
    o.config_path = config;
    return o;
  }
};

std::vector<std::pair<double, double>> parse_pairs(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("pairs must look like s:t,s:t");
    out.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
  }
  return out;
}

void emit(const CsvTable& table, const std::string& out_file) {
  if (out_file.empty()) {
    std::cout << table.str();
  } else {
    table.write(out_file);
  }
}

int cmd_list() {
  CsvTable t({"id", "anchor", "description"});
  for (const auto& s : list_scenarios()) t.add(s.id, "\"" + s.anchor + "\"", "\"" + s.description + "\"");
  std::cout << t.str();
  return 0;
}

int cmd_run(const std::string& id, const Common& common) {
  const auto result = run_scenario(id, common.options());
  for (const auto& c : result.checks)
    std::cout << fmt::format("{} {}: {}\n", c.ok() ? "ok  " : "FAIL", c.name, c.detail);
  std::cout << fmt::format("scenario {} seed {}: {}\n", result.id, result.seed, result.ok() ? "pass" : "fail");
  return result.ok() ? 0 : kCheckFailed;
}

int cmd_simulate(const std::string& id, std::size_t max_paths, const Common& common) {
  auto p = prepare_scenario(id, common.options());
  const auto dir = std::filesystem::path(common.out_dir) / id;
  std::filesystem::create_directories(dir);
  auto head = [max_paths](const std::vector<CadlagPath>& v) {
    return std::vector<CadlagPath>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(max_paths, v.size())));
  };
  write_paths_csv((dir / "paths.csv").string(), head(p.ensemble.paths));
  if (!p.ensemble.drivers.empty()) write_paths_csv((dir / "drivers.csv").string(), head(p.ensemble.drivers));
  if (p.ensemble.controls) write_paths_csv((dir / "controls.csv").string(), head(*p.ensemble.controls));
  std::cout << (dir / "paths.csv").string() << '\n';
  return 0;
}

int cmd_distance(const std::string& metric, double horizon, const std::vector<std::string>& files, std::size_t i1,
                 std::size_t i2) {
  const auto a = read_paths_csv(files.at(0));
  const auto b = read_paths_csv(files.at(1));
  if (i1 >= a.size() || i2 >= b.size()) throw UsageError("path index out of range");
  double d = 0.0;
  if (metric == "j1") {
    d = j1_distance(a[i1], b[i2], horizon).distance;
  } else {
    d = uniform_distance(a[i1], b[i2], horizon);
  }
  CsvTable t({"metric", "horizon", "distance"});
  t.add(metric, horizon, d);
  std::cout << t.str();
  return 0;
}

int cmd_defect(const std::string& id, double s, double t, const std::string& zfun, const std::string& out,
               const Common& common) {
  const auto p = prepare_scenario(id, common.options());
  std::vector<DefectReport> reports;
  const auto table = defect_table(p, {{s, t}}, zfun.empty() ? p.zfun : zfun, common.threads, &reports);
  emit(table, out);
  for (const auto& r : reports)
    if (!r.pass) return kCheckFailed;
  return 0;
}

int cmd_characteristics(const std::string& id, double t, double eps, std::optional<double> m, const std::string& out,
                        const Common& common) {
  const auto p = prepare_scenario(id, common.options());
  if (!p.candidate) throw UsageError("scenario " + id + " has no candidate characteristics");
  const auto rep = compare_characteristics(p.ensemble, *p.candidate, t, eps, m, {}, common.threads);
  CsvTable table({"characteristic", "t", "epsilon", "frequency", "n"});
  for (const auto& r : rep.rows) table.add(r.characteristic, t, eps, r.frequency, rep.n);
  emit(table, out);
  return 0;
}

int cmd_tightness(const std::string& check, const std::string& id, double horizon, double K, double bound,
                  const std::string& pairs, const std::vector<std::string>& sequence, const std::string& limit,
                  double tolerance, const std::string& out, const Common& common) {
  if (check == "measure") {
    if (sequence.empty() || limit.empty()) throw UsageError("--check measure needs --sequence and --limit");
    std::vector<LocallyFiniteMeasure> seq;
    for (const auto& f : sequence) seq.push_back(read_measure_csv(f));
    const auto q = read_measure_csv(limit);
    const double T = horizon > 0.0 ? horizon : q.horizon();
    const auto rep = measure_j1_convergence(seq, q, T, dyadic_grid(T, 12, &q), tolerance);
    CsvTable table({"index", "cdf_gap", "atom_square_gap"});
    for (std::size_t k = 0; k < seq.size(); ++k) table.add(k, rep.cdf_gaps[k], rep.atom_square_gaps[k]);
    emit(table, out);
    return rep.pass ? 0 : kCheckFailed;
  }
  if (id.empty()) throw UsageError("--check " + check + " needs --scenario");
  const auto p = prepare_scenario(id, common.options());
  const double T = horizon > 0.0 ? horizon : p.ensemble.horizon;
  if (check == "containment") {
    const auto rep = compact_containment(p.ensemble, T, K, common.threads);
    CsvTable table({"T", "K", "probability", "se", "n"});
    table.add(T, K, rep.probability, rep.std_error, rep.n);
    emit(table, out);
    return 0;
  }
  if (!p.q) throw UsageError("scenario " + id + " declares no measure q");
  if (!(bound > 0.0)) throw UsageError("--check increment needs --bound");
  const auto rows = conditional_increment_bound(
      p.ensemble, [](std::span<const double> x) { return x[0]; }, bound, *p.q, K,
      pairs.empty() ? p.pairs : parse_pairs(pairs), common.threads);
  CsvTable table({"s", "t", "lhs", "se", "bound", "flagged"});
  bool flagged = false;
  for (const auto& r : rows) {
    table.add(r.s, r.t, r.lhs, r.std_error, r.bound, r.flagged);
    flagged = flagged || r.flagged;
  }
  emit(table, out);
  return flagged ? kCheckFailed : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mpmlab: martingale-problem diagnostics for cadlag path ensembles"};
  app.require_subcommand(1);
  Common common;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out-dir", common.out_dir, "report directory");
    sub->add_option("--threads", common.threads, "worker threads (overrides MPMLAB_THREADS)");
  };

  auto* list = app.add_subcommand("list", "list registered scenarios");

  std::string scenario;
  auto* run = app.add_subcommand("run", "run a scenario and write its reports");
  run->add_option("scenario", scenario, "scenario id")->required();
  add_common(run);

  std::size_t max_paths = 100;
  auto* simulate = app.add_subcommand("simulate", "write a scenario's ensemble as CSV");
  simulate->add_option("--scenario", scenario)->required();
  simulate->add_option("--max-paths", max_paths, "paths to write");
  add_common(simulate);

  std::string metric = "j1";
  double horizon = 0.0;
  std::vector<std::string> files;
  std::size_t i1 = 0;
  std::size_t i2 = 0;
  auto* distance = app.add_subcommand("distance", "distance between two paths stored as CSV");
  distance->add_option("--metric", metric)->check(CLI::IsMember({"j1", "uniform"}));
  distance->add_option("--horizon", horizon)->required()->check(CLI::PositiveNumber);
  distance->add_option("--index1", i1, "path index in the first file");
  distance->add_option("--index2", i2, "path index in the second file");
  distance->add_option("files", files, "two path CSV files")->required()->expected(2)->check(CLI::ExistingFile);

  double s = 0.0;
  double t = 1.0;
  std::string zfun;
  std::string out;
  auto* defect = app.add_subcommand("defect", "defect statistics of a scenario's test processes");
  defect->add_option("--scenario", scenario)->required();
  defect->add_option("--s", s)->required();
  defect->add_option("--t", t)->required();
  defect->add_option("--zfun", zfun, "determining function, e.g. pointwise:tanh@0.5s");
  defect->add_option("--out", out, "CSV file (default stdout)");
  add_common(defect);

  double epsilon = 0.05;
  std::optional<double> m;
  bool compare = false;
  auto* characteristics = app.add_subcommand("characteristics", "compare pre-limit and candidate characteristics");
  characteristics->add_flag("--compare", compare)->required();
  characteristics->add_option("--scenario", scenario)->required();
  characteristics->add_option("--t", t);
  characteristics->add_option("--epsilon", epsilon)->check(CLI::PositiveNumber);
  characteristics->add_option("--m", m, "stop at T_m");
  characteristics->add_option("--out", out, "CSV file (default stdout)");
  add_common(characteristics);

  std::string check;
  double K = 1.0;
  double bound = 0.0;
  std::string pairs;
  std::vector<std::string> sequence;
  std::string limit;
  double tolerance = 1e-2;
  auto* tightness = app.add_subcommand("tightness", "tightness diagnostics");
  tightness->add_option("--check", check)->required()->check(CLI::IsMember({"containment", "measure", "increment"}));
  tightness->add_option("--scenario", scenario);
  tightness->add_option("--horizon", horizon);
  tightness->add_option("--K", K, "ball radius");
  tightness->add_option("--bound", bound, "declared constant C (increment)");
  tightness->add_option("--pairs", pairs, "s:t,s:t (increment)");
  tightness->add_option("--sequence", sequence, "measure CSV files q^n")->check(CLI::ExistingFile);
  tightness->add_option("--limit", limit, "measure CSV file Q")->check(CLI::ExistingFile);
  tightness->add_option("--tolerance", tolerance);
  tightness->add_option("--out", out, "CSV file (default stdout)");
  add_common(tightness);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }
  for (auto* sub : app.get_subcommands())
    if (sub->get_option_no_throw("--seed") != nullptr && sub->count("--seed")) common.seed = seed;

  try {
    if (*list) return cmd_list();
    if (*run) return cmd_run(scenario, common);
    if (*simulate) return cmd_simulate(scenario, max_paths, common);
    if (*distance) return cmd_distance(metric, horizon, files, i1, i2);
    if (*defect) return cmd_defect(scenario, s, t, zfun, out, common);
    if (*characteristics) return cmd_characteristics(scenario, t, epsilon, m, out, common);
    if (*tightness)
      return cmd_tightness(check, scenario, horizon, K, bound, pairs, sequence, limit, tolerance, out, common);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
  return kUsage;
}
