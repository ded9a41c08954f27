#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mpmlab {

/// Worker count: explicit request if positive, else MPMLAB_THREADS, else hardware concurrency.
std::size_t resolve_threads(std::size_t requested = 0);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items are
/// claimed dynamically; callers write results into slot i so the output does
/// not depend on scheduling. The first exception thrown by any item is
/// rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

/// Pairwise (cascade) summation; order-fixed so results are reproducible.
double pairwise_sum(std::span<const double> xs);

struct MeanSe {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Sample mean and standard error (sample sd / sqrt(n)); se = 0 for n = 1.
MeanSe mean_and_se(std::span<const double> xs);

}  // namespace mpmlab
