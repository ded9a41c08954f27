#include <gtest/gtest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "generators.hpp"
#include "mpmlab/skorokhod.hpp"
#include "oracles.hpp"

using namespace mpmlab;

TEST(J1, IndicatorSequenceClosedForm) {
  const auto limit = CadlagPath::indicator(1.0, 2.0);
  for (int n : {2, 4, 8, 16}) {
    const auto w = CadlagPath::indicator(1.0 - 1.0 / n, 2.0);
    const auto r = j1_distance(w, limit, 2.0);
    EXPECT_NEAR(r.distance, 1.0 / n, 1e-12);
    ASSERT_EQ(r.witness_time_change.size(), 1u);
    EXPECT_DOUBLE_EQ(r.witness_time_change[0].first, 1.0 - 1.0 / n);
    EXPECT_DOUBLE_EQ(r.witness_time_change[0].second, 1.0);
    EXPECT_EQ(uniform_distance(w, limit, 2.0), 1.0);
  }
}

TEST(J1, TimeShiftVersusJumpSizeTradeOff) {
  // A jump of size 0.1 moved by 0.5: matching costs 0.5, leaving it unmatched costs 0.1.
  const auto a = CadlagPath::scalar_steps(0.0, std::vector<std::pair<double, double>>{{0.25, 0.1}}, 1.0);
  const auto b = CadlagPath::scalar_steps(0.0, std::vector<std::pair<double, double>>{{0.75, 0.1}}, 1.0);
  EXPECT_NEAR(j1_distance(a, b, 1.0).distance, 0.1, 1e-15);
}

TEST(J1, JumpAtHorizonIsPinned) {
  const auto a = CadlagPath::indicator(1.0, 1.0);
  const auto b = CadlagPath::indicator(0.9, 1.0);
  // lambda(1) = 1, so the jump at 1 cannot be matched with the one at 0.9.
  EXPECT_NEAR(j1_distance(a, b, 1.0).distance, 1.0, 1e-15);
  EXPECT_NEAR(oracle::j1_bruteforce(a, b, 1.0), 1.0, 1e-15);
}

TEST(J1, MatchesBruteForceOnRandomPairs) {
  oracle::Gen gen(2024);
  for (int k = 0; k < 400; ++k) {
    const std::size_t dim = gen.coin() ? 1 : 2;
    const double T = 2.0;
    const auto a = gen.step_path(dim, 6, T, 16, gen.coin(0.2));
    const auto b = gen.step_path(dim, 6, T, 16, gen.coin(0.2));
    const double dp = j1_distance(a, b, T).distance;
    const double bf = oracle::j1_bruteforce(a, b, T);
    ASSERT_NEAR(dp, bf, 1e-12) << "pair " << k;
  }
}

TEST(J1, MetricProperties) {
  oracle::Gen gen(99);
  for (int k = 0; k < 300; ++k) {
    const double T = 1.0;
    const auto a = gen.step_path(1, 5, T, 12);
    const auto b = gen.step_path(1, 5, T, 12);
    const auto c = gen.step_path(1, 5, T, 12);
    const double ab = j1_distance(a, b, T).distance;
    EXPECT_EQ(j1_distance(a, a, T).distance, 0.0);
    EXPECT_NEAR(ab, j1_distance(b, a, T).distance, 1e-15);
    EXPECT_LE(ab, uniform_distance(a, b, T) + 1e-15);
    EXPECT_LE(j1_distance(a, c, T).distance, ab + j1_distance(b, c, T).distance + 1e-12);
  }
}

TEST(J1, WitnessMatchesAreIncreasing) {
  oracle::Gen gen(5);
  for (int k = 0; k < 100; ++k) {
    const auto a = gen.rough_path(1, 6, 1.0);
    const auto b = gen.rough_path(1, 6, 1.0);
    const auto r = j1_distance(a, b, 1.0);
    for (std::size_t i = 1; i < r.witness_time_change.size(); ++i) {
      EXPECT_LT(r.witness_time_change[i - 1].first, r.witness_time_change[i].first);
      EXPECT_LT(r.witness_time_change[i - 1].second, r.witness_time_change[i].second);
    }
    for (const auto& [s, t] : r.witness_time_change) EXPECT_LE(std::abs(s - t), r.distance + 1e-12);
  }
}

TEST(J1, WholeLineWeightsHorizons) {
  const auto a = CadlagPath::indicator(0.5, 3.0);
  const auto b = CadlagPath::indicator(0.75, 3.0);
  // Each T in {1, 2, 3} contributes 2^-T * 0.25.
  EXPECT_NEAR(j1_distance_whole_line(a, b), 0.25 * (0.5 + 0.25 + 0.125), 1e-15);
}

TEST(KAdmissible, Examples) {
  EXPECT_TRUE(k_admissible(SpikeFunction::finite_atoms({{0.5, 1.0}, {1.0, 2.0}}), 2.0, 0.1));
  EXPECT_FALSE(k_admissible(SpikeFunction::constant(1.0), 2.0, 0.5));
  EXPECT_TRUE(k_admissible(SpikeFunction::constant(1.0), 2.0, 1.5));
  // Spikes at 1/k only accumulate at 0.
  EXPECT_TRUE(k_admissible(SpikeFunction::harmonic(1.0), 2.0, 0.5));
}

TEST(ControlSet, JumpBoundedByControl) {
  const JumpControl ctrl{{{0.5, 1.0}}, Kappa::constant(1.0), Vec{0.0}};
  const auto inside = CadlagPath::scalar_steps(0.0, std::vector<std::pair<double, double>>{{0.5, 0.9}}, 1.0);
  const auto too_big = CadlagPath::scalar_steps(0.0, std::vector<std::pair<double, double>>{{0.5, 1.1}}, 1.0);
  const auto wrong_time = CadlagPath::scalar_steps(0.0, std::vector<std::pair<double, double>>{{0.6, 0.1}}, 1.0);
  EXPECT_TRUE(in_control_set(inside, ctrl, 1.0));
  EXPECT_FALSE(in_control_set(too_big, ctrl, 1.0));
  EXPECT_FALSE(in_control_set(wrong_time, ctrl, 1.0));
  // kappa grows with the running sup, including the post-jump value.
  const JumpControl grow{{{0.5, 0.5}}, Kappa::affine(1.0, 1.0), Vec{0.0}};
  const auto far = CadlagPath::scalar_steps(0.0, std::vector<std::pair<double, double>>{{0.5, 1.0}}, 1.0);
  EXPECT_TRUE(in_control_set(far, grow, 1.0));
}

TEST(Coincidence, IndicatorOutsideControlSet) {
  const auto limit = CadlagPath::indicator(1.0, 2.0);
  std::vector<CadlagPath> seq;
  for (int n : {2, 4, 8, 16}) seq.push_back(CadlagPath::indicator(1.0 - 1.0 / n, 2.0));
  const JumpControl at_one{{{1.0, 1.0}}, Kappa::constant(1.0), Vec{0.0}};
  const auto rep = coincidence_check(seq, limit, at_one, 2.0, {0.1, 0.1, false});
  EXPECT_FALSE(rep.precondition_ok);
  EXPECT_FALSE(rep.coincide);
  EXPECT_EQ(rep.precondition_violations.size(), 4u);
  const auto free = coincidence_check(seq, limit, at_one, 2.0, {0.1, 0.1, true});
  EXPECT_FALSE(free.coincide);
  EXPECT_NEAR(free.j1_distances.back(), 1.0 / 16, 1e-12);
  EXPECT_EQ(free.uniform_distances.back(), 1.0);
}

TEST(Coincidence, InControlSequenceCoincides) {
  // Jumps pinned to the control atoms; only levels move.
  const JumpControl ctrl{{{0.25, 1.0}, {0.75, 1.0}}, Kappa::constant(1.0), Vec{0.0}};
  auto path = [](double eps) {
    return CadlagPath::scalar_steps(0.0, std::vector<std::pair<double, double>>{{0.25, 0.5 + eps}, {0.75, eps}}, 1.0);
  };
  std::vector<CadlagPath> seq;
  for (int n = 1; n <= 10; ++n) seq.push_back(path(std::ldexp(1.0, -n - 4)));
  const auto rep = coincidence_check(seq, path(0.0), ctrl, 1.0, {1e-3, 1e-2, false});
  EXPECT_TRUE(rep.precondition_ok);
  EXPECT_TRUE(rep.coincide);
  EXPECT_LT(rep.j1_distances.back(), 1e-3);
}
