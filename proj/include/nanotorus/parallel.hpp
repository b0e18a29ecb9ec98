#pragma once

#include <cstddef>
#include <functional>

namespace nanotorus {

/// Worker count from NANOTORUS_WORKERS, else hardware concurrency (>= 1).
int worker_count();

/// Calls fn(i) for i in [0, n) across worker_count() threads. Each index is
/// visited exactly once; the first exception thrown by any worker is
/// rethrown after all workers join. Results must be written by index so the
/// outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace nanotorus
