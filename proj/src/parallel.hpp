#pragma once

#include <functional>

namespace rbfgen::detail {

// Run fn(i) for i in [0, count), spread over up to `jobs` worker threads.
// Callers write results into per-index slots so the outcome is identical
// for every jobs value; invocation order is unspecified for jobs > 1.
// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace rbfgen::detail
