#pragma once

#include <cstddef>
#include <functional>

namespace cmguide {

/// Runs fn(0..n-1) over a pool of worker threads. Callers write results into
/// per-index slots so aggregation stays independent of scheduling.
/// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cmguide
