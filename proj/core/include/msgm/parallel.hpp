#pragma once

#include <cstddef>
#include <functional>

namespace msgm {

// Worker cap: MSGM_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

// Runs fn(0..count-1) on a bounded pool. The first exception thrown by any
// job is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace msgm
