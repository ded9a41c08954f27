#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mpmlab {

/// SplitMix64 finaliser; a bijective mix of a 64-bit counter.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of stream `index` under `master`: counter-based, so any stream can be
/// reconstructed without touching the others.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Per-path random stream. One instance per path index; never shared.
class RandomStream {
 public:
  RandomStream(std::uint64_t master, std::uint64_t index) : engine_(stream_seed(master, index)) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  /// Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }
  double normal() { return normal_(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  double exponential(double rate) { return -std::log(uniform_open0()) / rate; }
  /// Index drawn from unnormalised nonnegative weights.
  template <typename Range>
  std::size_t categorical(const Range& probs) {
    double total = 0.0;
    for (double p : probs) total += p;
    double u = uniform() * total;
    std::size_t k = 0;
    for (double p : probs) {
      if (u < p) return k;
      u -= p;
      ++k;
    }
    return k == 0 ? 0 : k - 1;
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace mpmlab
