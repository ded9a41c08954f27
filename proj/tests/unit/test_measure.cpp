#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "generators.hpp"
#include "mpmlab/measure.hpp"
#include "oracles.hpp"

using namespace mpmlab;

TEST(Measure, CdfOfLebesguePlusAtoms) {
  const auto q = LocallyFiniteMeasure::mixed(1.0, {{1.0, 0.5}, {2.0, 0.5}}, 3.0);
  EXPECT_DOUBLE_EQ(q.cdf(0.5), 0.5);
  EXPECT_DOUBLE_EQ(q.cdf(1.0), 1.5);
  EXPECT_DOUBLE_EQ(q.cdf_left(1.0), 1.0);
  EXPECT_DOUBLE_EQ(q.cdf(2.5), 3.5);
  EXPECT_EQ(q.atom_mass(1.0), 0.5);
  EXPECT_EQ(q.atom_mass(1.5), 0.0);
  EXPECT_DOUBLE_EQ(q.atom_square_sum(3.0), 0.5);
}

TEST(Measure, DiscretizedLebesgueMergesCoincidingAtoms) {
  const auto q = LocallyFiniteMeasure::discretized_lebesgue(1.0, 4, {{1.0, 0.5}}, 2.0);
  EXPECT_EQ(q.atoms().size(), 8u);
  EXPECT_DOUBLE_EQ(q.atom_mass(1.0), 0.75);
  EXPECT_DOUBLE_EQ(q.cdf(2.0), 2.5);
}

TEST(Measure, Validation) {
  EXPECT_THROW(LocallyFiniteMeasure({{0.0, -1.0}}, {}, 1.0), std::invalid_argument);
  EXPECT_THROW(LocallyFiniteMeasure({}, {{0.5, 1.0}, {0.5, 1.0}}, 1.0), std::invalid_argument);
  EXPECT_THROW(LocallyFiniteMeasure({}, {{0.5, -1.0}}, 1.0), std::invalid_argument);
}

TEST(Measure, IntegrateLeftMatchesRiemannOracle) {
  oracle::Gen gen(3);
  const auto g = [](std::span<const double> x) { return std::sin(x[0]) + 0.5 * x[0]; };
  for (int k = 0; k < 25; ++k) {
    const auto q = gen.measure(2.0);
    const auto w = gen.rough_path(1, 6, 2.0);
    const double t = gen.uniform(0.2, 2.0);
    EXPECT_NEAR(integrate_left(w, q, t, g), oracle::integrate_left_oracle(w, q, t, g), 1e-4);
  }
}

TEST(Measure, IntegrateLeftUsesLeftLimitAtAtoms) {
  const auto q = LocallyFiniteMeasure::atomic({{1.0, 1.0}}, 2.0);
  const auto w = CadlagPath::indicator(1.0, 2.0);
  const auto id = [](std::span<const double> x) { return x[0]; };
  EXPECT_EQ(integrate_left(w, q, 2.0, id), 0.0);
  const auto early = CadlagPath::indicator(0.75, 2.0);
  EXPECT_EQ(integrate_left(early, q, 2.0, id), 1.0);
  EXPECT_EQ(integrate_left(early, q, 0.99, id), 0.0);
  EXPECT_THROW(integrate_left(w, q, 2.5, id), std::domain_error);
}

TEST(Kappa, ConstantAndAffine) {
  EXPECT_EQ(Kappa::constant(2.0)(5.0), 2.0);
  EXPECT_EQ(Kappa::affine(1.0, 2.0)(3.0), 7.0);
}

TEST(JumpControl, FromControlPathReadsJumpSizes) {
  const std::vector<std::pair<double, double>> ev{{0.5, 0.25}, {1.0, 1.25}};
  const auto L = CadlagPath::scalar_steps(0.0, ev, 2.0);
  const auto c = JumpControl::from_control_path(L, Kappa::constant(1.0), Vec{0.0});
  EXPECT_DOUBLE_EQ(c.u_at(0.5), 0.25);
  EXPECT_DOUBLE_EQ(c.u_at(1.0), 1.0);
  EXPECT_EQ(c.u_at(0.75), 0.0);
}
