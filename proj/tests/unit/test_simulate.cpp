#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <stdexcept>

#include "mpmlab/parallel.hpp"
#include "mpmlab/simulate.hpp"
#include "mpmlab/skorokhod.hpp"

using namespace mpmlab;

namespace {

EnsembleConfig config(std::size_t n, double step, double horizon, std::uint64_t seed, std::size_t threads = 1) {
  EnsembleConfig c;
  c.n_paths = n;
  c.grid_step = step;
  c.horizon = horizon;
  c.seed = seed;
  c.threads = threads;
  return c;
}

std::vector<double> terminal(const SimOutput& s) {
  std::vector<double> out;
  for (const auto& p : s.paths) out.push_back(p.terminal_value()[0]);
  return out;
}

}  // namespace

TEST(Random, StreamsAreDeterministicAndDistinct) {
  RandomStream a(1, 0), b(1, 0), c(1, 1);
  const double x = a.uniform();
  EXPECT_EQ(x, b.uniform());
  EXPECT_NE(x, c.uniform());
}

TEST(Parallel, PairwiseSumAndStandardError) {
  std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  EXPECT_EQ(pairwise_sum(xs), 10.0);
  const auto ms = mean_and_se(xs);
  EXPECT_DOUBLE_EQ(ms.mean, 2.5);
  EXPECT_NEAR(ms.std_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_THROW(mean_and_se(std::span<const double>{}), std::invalid_argument);
}

TEST(Parallel, ForRethrowsWorkerException) {
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Simulate, ThreadCountDoesNotChangeOutput) {
  auto model = std::make_shared<const CharModel>(compound_poisson_model(3.0, JumpLaw::symmetric(0.5)));
  const auto a = simulate_jump_diffusion(model, config(64, 0.01, 1.0, 42, 1));
  const auto b = simulate_jump_diffusion(model, config(64, 0.01, 1.0, 42, 4));
  for (std::size_t i = 0; i < 64; ++i) EXPECT_EQ(a.paths[i], b.paths[i]);
  const auto w1 = simulate_random_walk(50, config(32, 0.02, 1.0, 3, 1));
  const auto w2 = simulate_random_walk(50, config(32, 0.02, 1.0, 3, 3));
  for (std::size_t i = 0; i < 32; ++i) EXPECT_EQ(w1.paths[i], w2.paths[i]);
}

TEST(Simulate, GridMustDivideHorizon) {
  EXPECT_THROW(config(1, 0.3, 1.0, 0).steps(), std::invalid_argument);
  EXPECT_EQ(config(1, 0.25, 1.0, 0).steps(), 4u);
}

TEST(Simulate, RandomWalkScaling) {
  const auto w = simulate_random_walk(100, config(2000, 0.01, 1.0, 9));
  const auto& p = w.paths.front();
  EXPECT_EQ(p.num_events(), 100u);
  for (std::size_t k = 1; k <= p.num_events(); ++k)
    EXPECT_NEAR(std::abs(p.value(k)[0] - p.value(k - 1)[0]), 0.1, 1e-12);
  const auto x = terminal(w);
  std::vector<double> sq;
  for (double v : x) sq.push_back(v * v);
  const auto ms = mean_and_se(sq);
  EXPECT_NEAR(ms.mean, 1.0, 4.0 * ms.std_error);
}

TEST(Simulate, BrownianEulerMoments) {
  auto model = std::make_shared<const CharModel>(brownian_model(0.5, 2.0));
  const auto s = simulate_ito(model, config(4000, 0.01, 1.0, 17));
  const auto x = terminal(s);
  const auto m = mean_and_se(x);
  EXPECT_NEAR(m.mean, 0.5, 4.0 * m.std_error);
  std::vector<double> c;
  for (double v : x) c.push_back((v - 0.5) * (v - 0.5));
  const auto v = mean_and_se(c);
  EXPECT_NEAR(v.mean, 4.0, 4.0 * v.std_error);
  EXPECT_THROW(simulate_ito(std::make_shared<const CharModel>(compound_poisson_model(1.0, JumpLaw::point({1.0}))),
                            config(1, 0.1, 1.0, 0)),
               std::invalid_argument);
}

TEST(Simulate, JumpDiffusionStaysInItsControlSet) {
  CharModel m = compound_poisson_model(2.0, JumpLaw::symmetric(0.7));
  m.diffusion = [](double, std::span<const double> x) { return Vec{0.3 + 0.1 * std::sin(x[0])}; };
  m.drift = [](double t, std::span<const double> x) { return Vec{-x[0] + t}; };
  auto model = std::make_shared<const CharModel>(m);
  const auto s = simulate_jump_diffusion(model, config(200, 0.01, 1.0, 5));
  ASSERT_TRUE(s.controls.has_value());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto ctrl = control_from_path((*s.controls)[i], 1);
    EXPECT_TRUE(in_control_set(s.paths[i], ctrl, 1.0)) << "path " << i;
  }
}

TEST(Simulate, JumpDiffusionRefusesCoarseGrid) {
  auto model = std::make_shared<const CharModel>(compound_poisson_model(20.0, JumpLaw::point({1.0})));
  EXPECT_THROW(simulate_jump_diffusion(model, config(1, 0.01, 1.0, 0)), std::domain_error);
}

TEST(Simulate, ScheduledJumpLandsAtItsTime) {
  auto model = std::make_shared<const CharModel>(scheduled_jump_model({{0.5, JumpLaw::point({2.0})}}));
  const auto s = simulate_jump_diffusion(model, config(3, 0.1, 1.0, 1));
  for (const auto& p : s.paths) {
    EXPECT_EQ(p.eval_left(0.5)[0], 0.0);
    EXPECT_EQ(p.eval(0.5)[0], 2.0);
  }
}

TEST(Simulate, ChainJumpsAtAtomsWithTheAtomLaw) {
  // Lambda = [[-1, 1], [1, -1]], q = delta_1 only: one step of I + Lambda at t = 1,
  // which swaps the state with probability 1.
  const auto q = LocallyFiniteMeasure::atomic({{1.0, 1.0}}, 2.0);
  const auto s = simulate_ek_ftd_chain(2, {-1.0, 1.0, 1.0, -1.0}, q, config(50, 0.5, 2.0, 4));
  for (const auto& p : s.paths) {
    ASSERT_EQ(p.num_events(), 1u);
    EXPECT_EQ(p.event_time(0), 1.0);
    EXPECT_EQ(p.terminal_value()[0], 1.0);
  }
  EXPECT_THROW(simulate_ek_ftd_chain(2, {-1.0, 2.0, 1.0, -1.0}, q, config(1, 0.5, 2.0, 0)), std::invalid_argument);
  EXPECT_THROW(simulate_ek_ftd_chain(2, {-3.0, 3.0, 1.0, -1.0}, q, config(1, 0.5, 2.0, 0)), std::invalid_argument);
}

TEST(Simulate, ChainOccupationMatchesForwardEquation) {
  // Two states, rates a = 1 (0 -> 1) and b = 2 (1 -> 0) on Lebesgue:
  // P(X_t = 1 | X_0 = 0) = a / (a + b) (1 - exp(-(a + b) t)).
  const auto q = LocallyFiniteMeasure::lebesgue(1.0, 1.0);
  const auto s = simulate_ek_ftd_chain(2, {-1.0, 1.0, 2.0, -2.0}, q, config(20000, 0.5, 1.0, 8));
  const auto x = terminal(s);
  const auto m = mean_and_se(x);
  EXPECT_NEAR(m.mean, (1.0 / 3.0) * (1.0 - std::exp(-3.0)), 4.0 * m.std_error);
}

TEST(Simulate, VolterraUnitKernelIsDriverPlusForcing) {
  const double step = 0.05;
  VolterraModel vm;
  for (int i = 0; i <= 20; ++i) {
    vm.g0.push_back(Vec{std::cos(i * step)});
    vm.kernel.push_back(Vec{1.0});
  }
  vm.drift = [](std::span<const double> x) { return Vec{-x[0]}; };
  vm.covariance = [](std::span<const double>) { return Vec{0.25}; };
  const auto s = simulate_volterra(vm, config(20, step, 1.0, 6));
  ASSERT_EQ(s.drivers.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i)
    for (int k = 0; k <= 20; ++k)
      EXPECT_NEAR(s.paths[i].eval(k * step)[0], std::cos(k * step) + s.drivers[i].eval(k * step)[0], 1e-13);
}

TEST(Simulate, VolterraCorrelatedNoiseCovariance) {
  // Two-dimensional driver with covariance [[1, 0.6], [0.6, 0.5]] and K = identity.
  VolterraModel vm;
  vm.dim_x = 2;
  vm.dim_z = 2;
  for (int i = 0; i <= 10; ++i) {
    vm.g0.push_back(Vec{0.0, 0.0});
    vm.kernel.push_back(Vec{1.0, 0.0, 0.0, 1.0});
  }
  vm.covariance = [](std::span<const double>) { return Vec{1.0, 0.6, 0.6, 0.5}; };
  const auto s = simulate_volterra(vm, config(20000, 0.1, 1.0, 12));
  std::vector<double> xx, xy, yy;
  for (const auto& z : s.drivers) {
    const auto v = z.terminal_value();
    xx.push_back(v[0] * v[0]);
    xy.push_back(v[0] * v[1]);
    yy.push_back(v[1] * v[1]);
  }
  const auto a = mean_and_se(xx), b = mean_and_se(xy), c = mean_and_se(yy);
  EXPECT_NEAR(a.mean, 1.0, 4.0 * a.std_error);
  EXPECT_NEAR(b.mean, 0.6, 4.0 * b.std_error);
  EXPECT_NEAR(c.mean, 0.5, 4.0 * c.std_error);
}
