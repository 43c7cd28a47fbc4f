#pragma once

#include <cstddef>
#include <functional>

namespace zslkit {

/// Worker count: ZSLKIT_THREADS if set and positive, else hardware concurrency (at least 1).
[[nodiscard]] std::size_t worker_count();

/// Runs body(i) for i in [0, n) over up to worker_count() threads.
/// Indices are split into contiguous blocks; body must only write state owned by index i.
/// The first exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);

}  // namespace zslkit
