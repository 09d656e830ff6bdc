#pragma once

#include <cstddef>
#include <functional>

namespace hesspec {

/// Worker count: HESSPEC_THREADS if set and positive, else the hardware concurrency.
int worker_count();

/// Runs fn(0..n-1) on up to `threads` workers (0 = worker_count()). The first exception
/// thrown by any job is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0);

}  // namespace hesspec
