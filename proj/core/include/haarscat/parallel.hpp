#pragma once

#include <cstddef>
#include <functional>

namespace haar {

/// Worker count from an explicit request, falling back to HAAR_THREADS and
/// then to 1. A request of 0 means "use the fallback".
std::size_t resolve_threads(std::size_t requested);

/// Runs body(i) for i in [0, n) over `threads` workers with static block
/// partitioning. Callers write results into per-index slots so the outcome
/// does not depend on completion order. Exceptions from workers are rethrown.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace haar
