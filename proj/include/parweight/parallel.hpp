#pragma once

#include <cstddef>
#include <functional>

namespace parweight {

/// Worker count used when a caller passes threads <= 0: the PARWEIGHT_THREADS
/// environment variable if set, otherwise the hardware concurrency.
int default_threads();

/// Runs fn(begin, end) over a fixed contiguous partition of [0, count).
/// The partition depends only on (count, threads), so any computation whose
/// per-index work is independent gives results independent of the degree.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace parweight
