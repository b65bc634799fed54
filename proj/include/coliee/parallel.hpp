#pragma once

#include <cstddef>
#include <functional>

namespace coliee {

/// Number of worker threads used by parallel stages; 0 means hardware
/// concurrency. Set once by the CLI before any stage runs.
void set_worker_count(unsigned workers);
unsigned worker_count();

/// Runs fn(i) for i in [0, n) across worker threads. Each index is visited
/// exactly once; callers write only to slot i so results are order-independent.
/// The first exception thrown by any worker is rethrown after all joins.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace coliee
