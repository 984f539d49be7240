#pragma once

#include <cstddef>
#include <functional>

namespace kcover {

/// Worker count used when a caller passes jobs <= 0: the KCOVER_JOBS
/// environment variable if set, else hardware concurrency.
int default_jobs();

/// Runs body(i) for every i in [0, n) on up to `jobs` threads. Work is handed
/// out in contiguous chunks; body must only write state owned by index i.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace kcover
