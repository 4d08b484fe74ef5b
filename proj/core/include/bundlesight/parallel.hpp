#pragma once

#include <cstddef>
#include <functional>

namespace bundlesight {

// Worker cap: min(hardware_concurrency, BUNDLESIGHT_THREADS if set).
// A value of 1 runs loops inline on the calling thread.
int worker_count();

// Runs f(i) for i in [0, n). Work is split into contiguous chunks, one per
// worker; each index writes only to its own output slot, and any reduction
// happens afterwards in index order on the caller's thread. Results are
// therefore identical at every worker count. f must not throw across threads
// without expecting the first exception to be rethrown on the caller.
// `workers` <= 0 uses worker_count(); an explicit value forces that many
// threads even beyond the hardware count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f,
                  int workers = 0);

}  // namespace bundlesight
