#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "mpmlab/tightness.hpp"

using namespace mpmlab;

namespace {

SimOutput ensemble_of(std::vector<CadlagPath> paths) {
  SimOutput s;
  s.horizon = paths.front().horizon();
  s.paths = std::move(paths);
  return s;
}

}  // namespace

TEST(Containment, TrivialCases) {
  const auto s = ensemble_of({CadlagPath::constant(0.5, 1.0), CadlagPath::constant(-0.5, 1.0)});
  EXPECT_EQ(compact_containment(s, 1.0, 1.0).probability, 1.0);
  EXPECT_EQ(compact_containment(s, 1.0, 0.0).probability, 0.0);
}

TEST(Containment, BrownianEnsembleReflectionBound) {
  EnsembleConfig c;
  c.n_paths = 4000;
  c.grid_step = 0.01;
  c.seed = 31;
  auto model = std::make_shared<const CharModel>(brownian_model());
  const auto rep = compact_containment(simulate_ito(model, c), 1.0, 4.0);
  // P(sup |W| > 4) <= 4 (1 - Phi(4)) ~ 1.3e-4.
  EXPECT_GE(rep.probability, 0.99);
}

TEST(MeasureConvergence, IdenticalSequence) {
  const auto q = LocallyFiniteMeasure::mixed(1.0, {{0.5, 0.5}}, 1.0);
  const auto rep = measure_j1_convergence({q, q}, q, 1.0, dyadic_grid(1.0, 6, &q));
  EXPECT_EQ(rep.cdf_gap, 0.0);
  EXPECT_EQ(rep.atom_square_gap, 0.0);
  EXPECT_TRUE(rep.pass);
}

TEST(MeasureConvergence, DiscretizedLebesgueClosedForm) {
  const auto Q = LocallyFiniteMeasure::lebesgue(1.0, 1.0);
  std::vector<LocallyFiniteMeasure> seq;
  std::vector<int> ns{4, 16, 64, 256, 1024};
  for (int n : ns) seq.push_back(LocallyFiniteMeasure::discretized_lebesgue(1.0, n, {}, 1.0));
  const auto rep = measure_j1_convergence(seq, Q, 1.0, dyadic_grid(1.0, 12));
  for (std::size_t k = 0; k < ns.size(); ++k) {
    EXPECT_LE(rep.cdf_gaps[k], 1.0 / ns[k] + 1e-15);
    EXPECT_NEAR(rep.atom_square_gaps[k], 1.0 / ns[k], 1e-15);  // n atoms of mass 1/n
  }
  EXPECT_TRUE(rep.pass);
}

TEST(MeasureConvergence, SplitAtomFails) {
  const auto Q = LocallyFiniteMeasure::atomic({{1.0, 1.0}}, 2.0);
  std::vector<LocallyFiniteMeasure> seq;
  for (int n : {4, 16, 64, 256})
    seq.push_back(LocallyFiniteMeasure::atomic({{1.0 - 1.0 / n, 0.5}, {1.0 + 1.0 / n, 0.5}}, 2.0));
  const auto rep = measure_j1_convergence(seq, Q, 2.0, dyadic_grid(2.0, 4, &Q));
  EXPECT_EQ(rep.cdf_gap, 0.0);  // no grid point left within 1/256 of 1
  EXPECT_EQ(rep.atom_square_gap, 0.5);
  EXPECT_FALSE(rep.pass);
}

TEST(DyadicGrid, AvoidsAtoms) {
  const auto q = LocallyFiniteMeasure::atomic({{0.5, 1.0}}, 1.0);
  EXPECT_EQ(dyadic_grid(1.0, 2, &q), (std::vector<double>{0.25, 0.75, 1.0}));
}

TEST(Increment, ConstantPathsAndConstantF) {
  const auto s = ensemble_of({CadlagPath::constant(0.5, 1.0), CadlagPath::constant(1.5, 1.0)});
  const auto q = LocallyFiniteMeasure::lebesgue(1.0, 1.0);
  const auto rows = conditional_increment_bound(s, [](std::span<const double> x) { return x[0]; }, 0.0, q, 10.0,
                                                {{0.0, 0.5}, {0.5, 1.0}});
  for (const auto& r : rows) {
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_FALSE(r.flagged);
  }
  const auto jumpy = ensemble_of({CadlagPath::indicator(0.5, 1.0), CadlagPath::indicator(0.25, 1.0)});
  const auto rows2 = conditional_increment_bound(jumpy, [](std::span<const double>) { return 3.0; }, 0.0, q, 10.0,
                                                 {{0.0, 1.0}});
  EXPECT_EQ(rows2[0].lhs, 0.0);
  EXPECT_FALSE(rows2[0].flagged);
}

TEST(Increment, StopsAtBallExit) {
  const auto s = ensemble_of({CadlagPath::scalar_steps(
      0.0, std::vector<std::pair<double, double>>{{0.25, 2.0}, {0.5, 10.0}}, 1.0)});
  const auto q = LocallyFiniteMeasure::lebesgue(1.0, 1.0);
  const auto rows =
      conditional_increment_bound(s, [](std::span<const double> x) { return x[0]; }, 100.0, q, 1.0, {{0.0, 1.0}});
  // Exit at 0.25 freezes the path at 2.
  EXPECT_EQ(rows[0].lhs, 4.0);
  EXPECT_EQ(*ball_exit_time(s.paths[0], 1.0), 0.25);
}
