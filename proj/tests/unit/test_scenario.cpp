#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "mpmlab/scenario.hpp"

using namespace mpmlab;

namespace {

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mpmlab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string write_config(const std::string& dir, const std::string& text) {
  const auto file = dir + "/config.json";
  std::ofstream(file) << text;
  return file;
}

std::string slurp(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Scenarios, RegistryIsStableAndAnchored) {
  const auto& a = list_scenarios();
  const auto& b = list_scenarios();
  ASSERT_GE(a.size(), 8u);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_FALSE(a[i].anchor.empty());
    EXPECT_FALSE(a[i].description.empty());
    ids.insert(a[i].id);
  }
  EXPECT_EQ(ids.size(), a.size());
  for (const char* id : {"donsker-sv", "indicator-j1", "topology-coincidence", "ek-ftd-chain", "smg-brownian",
                         "volterra-identity", "characteristics-euler", "ui-diagnostic"})
    EXPECT_TRUE(ids.count(id)) << id;
}

TEST(Scenarios, UnknownIdIsUsageError) {
  RunOptions o;
  o.out_dir = temp_dir("unknown");
  EXPECT_THROW(run_scenario("no-such-scenario", o), UsageError);
  EXPECT_THROW(prepare_scenario("indicator-j1", o), UsageError);
}

TEST(Scenarios, IndicatorRunWritesReports) {
  RunOptions o;
  o.out_dir = temp_dir("indicator");
  const auto r = run_scenario("indicator-j1", o);
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(std::filesystem::exists(o.out_dir + "/indicator-j1/distances.csv"));
  const auto summary = slurp(o.out_dir + "/indicator-j1/summary.json");
  EXPECT_NE(summary.find("\"scenario\": \"indicator-j1\""), std::string::npos);
  EXPECT_EQ(slurp(o.out_dir + "/indicator-j1/distances.csv").substr(0, 24), "n,j1,uniform,j1_expected");
}

TEST(Scenarios, ConfigValidation) {
  const auto dir = temp_dir("config");
  RunOptions o;
  o.out_dir = dir;
  o.config_path = write_config(dir, R"({"schema": "mpmlab.config/0"})");
  EXPECT_THROW(run_scenario("ui-diagnostic", o), UsageError);
  o.config_path = write_config(dir, R"({"schema": "mpmlab.config/1", "params": {"bogus": 1}})");
  EXPECT_THROW(run_scenario("ui-diagnostic", o), UsageError);
  o.config_path = write_config(dir, R"({"schema": "mpmlab.config/1", "params": {"n": "many"}})");
  EXPECT_THROW(run_scenario("ui-diagnostic", o), UsageError);
  o.config_path = write_config(dir, "{not json");
  EXPECT_THROW(run_scenario("ui-diagnostic", o), UsageError);
  o.config_path = write_config(dir, R"({"schema": "mpmlab.config/1", "scenario": "ui-diagnostic",
                                        "params": {"n": 20000, "seed": 5}})");
  const auto r = run_scenario("ui-diagnostic", o);
  EXPECT_EQ(r.seed, 5u);
  EXPECT_TRUE(r.ok());
}

TEST(Scenarios, SeedOverrideAndDeterminism) {
  const auto dir = temp_dir("determinism");
  RunOptions o;
  o.config_path = write_config(dir, R"({"schema": "mpmlab.config/1", "params": {"n_paths": 300}})");
  o.seed = 99;
  o.out_dir = dir + "/a";
  o.threads = 1;
  const auto a = run_scenario("smg-compound-poisson", o);
  o.out_dir = dir + "/b";
  o.threads = 3;
  const auto b = run_scenario("smg-compound-poisson", o);
  EXPECT_EQ(a.seed, 99u);
  for (const auto& f : a.files)
    EXPECT_EQ(slurp(dir + "/a/smg-compound-poisson/" + f), slurp(dir + "/b/smg-compound-poisson/" + f)) << f;
}

TEST(Scenarios, PreparedDefectTable) {
  RunOptions o;
  o.out_dir = temp_dir("prepared");
  o.config_path = write_config(o.out_dir, R"({"schema": "mpmlab.config/1", "params": {"n_paths": 500}})");
  const auto p = prepare_scenario("ek-ftd-chain", o);
  EXPECT_TRUE(p.q.has_value());
  const auto t = defect_table(p, {{0.5, 1.0}}, "one", 1);
  EXPECT_EQ(t.rows().size(), p.tests.size());
  EXPECT_THROW(defect_table(p, {{0.5, 1.0}}, "pointwise:nope@0.1", 1), UsageError);
}
