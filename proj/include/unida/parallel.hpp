#pragma once

#include <cstddef>
#include <functional>

namespace unida {

// Worker budget: UNIDA_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t worker_count();

// Runs fn(begin, end) over contiguous chunks of [0, n). Chunks are disjoint,
// so writes to per-index outputs need no locking. The first exception thrown
// by any chunk is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                  std::size_t workers = worker_count());

}  // namespace unida
