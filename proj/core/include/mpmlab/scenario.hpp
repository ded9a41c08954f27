#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mpmlab/characteristics.hpp"
#include "mpmlab/io.hpp"
#include "mpmlab/measure.hpp"
#include "mpmlab/mptest.hpp"
#include "mpmlab/simulate.hpp"

namespace mpmlab {

/// Bad scenario id, malformed config or invalid option values.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioInfo {
  std::string id;
  std::string anchor;  ///< the result or construction the scenario exercises
  std::string description;
  bool has_ensemble = false;
};

/// Registered scenarios in a fixed order.
const std::vector<ScenarioInfo>& list_scenarios();
const ScenarioInfo& find_scenario(const std::string& id);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  std::string out_dir = ".";
  /// JSON config file; empty means defaults. Shape:
  ///   {"schema": "mpmlab.config/1", "params": {"n_paths": 2000, ...}}
  std::string config_path;
};

struct Check {
  std::string name;
  bool pass = false;
  bool expected = true;  ///< some checks exhibit a counterexample and must fail
  std::string detail;

  bool ok() const { return pass == expected; }
};

struct ScenarioResult {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<Check> checks;
  std::vector<std::string> files;

  bool ok() const;
};

/// Runs a scenario, writing CSV reports and summary.json into
/// <out_dir>/<id>/. Throws UsageError on an unknown id or bad config.
ScenarioResult run_scenario(const std::string& id, const RunOptions& opts);

/// Ensemble and test processes behind an ensemble-bearing scenario.
struct PreparedScenario {
  std::string id;
  std::uint64_t seed = 0;
  SimOutput ensemble;
  std::vector<TestProcess> tests;
  std::vector<std::pair<double, double>> pairs;
  std::string zfun;  ///< determining function, anchored at each s
  std::optional<LocallyFiniteMeasure> q;
  std::optional<CharacteristicsEvaluator> candidate;
};

PreparedScenario prepare_scenario(const std::string& id, const RunOptions& opts);

/// One defect row per (test, pair).
CsvTable defect_table(const PreparedScenario& prepared, const std::vector<std::pair<double, double>>& pairs,
                      const std::string& zfun, std::size_t threads, std::vector<DefectReport>* reports = nullptr);

}  // namespace mpmlab
