#pragma once

#include <cstddef>
#include <functional>

namespace chiplattice {

/// Worker count: CHIPLATTICE_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

/// Splits [0, n) into contiguous chunks and runs fn(begin, end) on up to `workers` threads.
/// Work items must not share mutable state; results cannot depend on the split.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                  unsigned workers = worker_count());

}  // namespace chiplattice
