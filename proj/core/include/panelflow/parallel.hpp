#pragma once

// Tiny deterministic parallel-for: splits [0, n) into contiguous chunks, one
// per worker thread. Results must not depend on the chunking (callers keep a
// fixed per-index summation order), so thread count never changes output.

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace panelflow {

inline int default_worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  return std::max(1, std::min<int>(static_cast<int>(hw), 16));
}

// fn(begin, end) is called for disjoint ranges covering [0, n).
inline void parallel_for(int n, const std::function<void(int, int)>& fn, int workers = 0) {
  if (workers <= 0) workers = default_worker_count();
  workers = std::min(workers, std::max(1, n));
  if (workers == 1 || n <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int b = w * chunk;
    const int e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace panelflow
