#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <random>

#include "mpmlab/mptest.hpp"
#include "mpmlab/simulate.hpp"
#include "mpmlab/skorokhod.hpp"

namespace {

using namespace mpmlab;

CadlagPath random_steps(std::mt19937_64& rng, int jumps, double T) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PathBuilder b(0.0, T);
  for (int k = 1; k <= jumps; ++k) b.push(T * (k - u(rng) * 0.5) / (jumps + 1), u(rng));
  return std::move(b).build();
}

void BM_J1Distance(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int jumps = static_cast<int>(state.range(0));
  const auto a = random_steps(rng, jumps, 1.0);
  const auto b = random_steps(rng, jumps, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(j1_distance(a, b, 1.0).distance);
  state.SetComplexityN(jumps);
}
BENCHMARK(BM_J1Distance)->RangeMultiplier(2)->Range(8, 256)->Complexity();

EnsembleConfig config(std::size_t n, double step) {
  EnsembleConfig c;
  c.n_paths = n;
  c.grid_step = step;
  c.seed = 7;
  c.threads = 1;
  return c;
}

void BM_SimulateCompoundPoisson(benchmark::State& state) {
  auto model = std::make_shared<const CharModel>(compound_poisson_model(2.0, JumpLaw::symmetric(1.0), 1.0));
  const auto cfg = config(static_cast<std::size_t>(state.range(0)), 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_jump_diffusion(model, cfg).paths.size());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateCompoundPoisson)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_RandomWalkDefect(benchmark::State& state) {
  const auto sim = simulate_random_walk(400, config(static_cast<std::size_t>(state.range(0)), 1.0 / 400));
  const auto test = build_sv_test(identity_function(), nullptr,
                                  [](double, std::span<const double>) { return Vec{1.0}; });
  const auto z = parse_determining_function("pointwise:tanh@0.5s", 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(defect_statistic(sim, test, z, 0.5, 1.0).estimate);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RandomWalkDefect)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
