#include "toonrig/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace toonrig {

namespace {
std::atomic<int> g_default_workers{0};
}

void set_default_workers(int workers) { g_default_workers.store(workers); }

int default_workers() {
  int w = g_default_workers.load();
  if (w > 0) return w;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(size_t n, int workers,
                  const std::function<void(size_t, size_t)>& fn) {
  if (n == 0) return;
  int w = workers > 0 ? workers : default_workers();
  size_t nthreads = std::min<size_t>(static_cast<size_t>(w), n);
  if (nthreads <= 1) {
    fn(0, n);
    return;
  }
  size_t chunk = (n + nthreads - 1) / nthreads;
  std::vector<std::thread> threads;
  threads.reserve(nthreads);
  for (size_t t = 0; t < nthreads; ++t) {
    size_t begin = t * chunk;
    size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : threads) th.join();
}

}  // namespace toonrig
