#pragma once

#include <cstddef>
#include <functional>

namespace netblock {

/// Worker cap: NETBLOCK_THREADS if set (>= 1), else hardware concurrency.
int max_threads();

/// Runs fn(i) for i in [0, count) on up to max_threads() workers using a
/// static index partition. Callers must write only to per-index slots, which
/// keeps results identical for any thread count. The first exception (lowest
/// chunk) is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace netblock
