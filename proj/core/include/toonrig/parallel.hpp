#pragma once

#include <cstddef>
#include <functional>

namespace toonrig {

/// Runs fn(begin, end) over a partition of [0, n) on `workers` threads.
/// Chunking depends only on (n, workers); callers must make per-index work
/// independent so results are identical for any worker count.
void parallel_for(size_t n, int workers,
                  const std::function<void(size_t, size_t)>& fn);

/// Process-wide default used when a worker count of 0 is passed.
void set_default_workers(int workers);
int default_workers();

}  // namespace toonrig
