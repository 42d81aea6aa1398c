#pragma once

#include <cstddef>
#include <functional>

namespace scs {

/// Caps the number of worker threads used by library loops (0 = hardware concurrency).
void set_max_threads(unsigned count);
unsigned max_threads();

/// Runs body(i) for i in [0, count). Work is split into contiguous blocks; callers
/// write into per-index slots and reduce afterwards, so results are independent of
/// the thread count. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace scs
