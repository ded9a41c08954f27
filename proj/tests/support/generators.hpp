#pragma once

// Hand-rolled generators for property tests. Each draws from a seeded
// std::mt19937_64 so failures replay from the printed seed.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "mpmlab/measure.hpp"
#include "mpmlab/paths.hpp"

namespace mpmlab::oracle {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  bool coin(double p = 0.5) { return uniform() < p; }

  /// Distinct sorted times from the grid k * T / slots, k = 1 .. slots; the
  /// coarse grid makes ties between paths common. T itself is excluded
  /// unless `allow_end`.
  std::vector<double> grid_times(int count, double T, int slots, bool allow_end = false) {
    std::set<int> ks;
    const int top = allow_end ? slots : slots - 1;
    count = std::min(count, top);
    while (static_cast<int>(ks.size()) < count) ks.insert(integer(1, top));
    std::vector<double> out;
    for (int k : ks) out.push_back(T * k / slots);
    return out;
  }

  /// Step path with up to `max_jumps` nonzero jumps on a time grid.
  CadlagPath step_path(std::size_t dim, int max_jumps, double T, int slots = 16, bool allow_end = false) {
    const auto times = grid_times(integer(0, max_jumps), T, slots, allow_end);
    Vec x(dim);
    for (auto& v : x) v = std::round(4.0 * normal()) / 4.0;
    PathBuilder b(x, T);
    for (double t : times) {
      Vec y = x;
      do {
        for (auto& v : y) v = x[&v - y.data()] + std::round(4.0 * normal()) / 4.0;
      } while (y == x);
      b.push(t, y);
      x = y;
    }
    return std::move(b).build();
  }

  /// Step path with continuous jump times and values.
  CadlagPath rough_path(std::size_t dim, int jumps, double T) {
    std::vector<double> times;
    for (int k = 0; k < jumps; ++k) times.push_back(uniform(0.0, T));
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    Vec x(dim);
    for (auto& v : x) v = normal();
    PathBuilder b(x, T);
    for (double t : times) {
      if (t <= 0.0) continue;
      for (auto& v : x) v += normal();
      b.push(t, x);
    }
    return std::move(b).build();
  }

  /// Piecewise-constant density with a few atoms.
  LocallyFiniteMeasure measure(double T) {
    std::vector<RateSegment> segs{{0.0, uniform(0.0, 2.0)}};
    for (double s : grid_times(integer(0, 3), T, 8)) segs.push_back({s, uniform(0.0, 2.0)});
    std::vector<Atom> atoms;
    for (double s : grid_times(integer(0, 3), T, 7, true)) atoms.push_back({s, uniform(0.05, 1.0)});
    return {segs, atoms, T};
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace mpmlab::oracle
