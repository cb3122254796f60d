#pragma once

#include <cstddef>
#include <functional>

namespace illusion_forge {

/// Worker count from ILLUSION_FORGE_THREADS, capped by hardware concurrency;
/// at least 1.
int default_thread_count();

/// Resolves a requested count: 0 means `default_thread_count()`.
int resolve_thread_count(int requested);

/// Calls `body(begin, end)` on contiguous chunks of [0, n). Chunk boundaries
/// depend only on `n` and the thread count, never on scheduling.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Pairwise summation; the result depends only on the input order.
double pairwise_sum(const double* data, std::size_t n);

}  // namespace illusion_forge
