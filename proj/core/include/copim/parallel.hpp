#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace copim {

inline unsigned resolve_threads(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

// Runs body(begin, end) over a static contiguous partition of [0, n).
// Callers write results into per-index storage or per-range accumulators
// that merge associatively, so every thread count produces identical
// output. body must not throw.
inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  std::size_t t = std::min<std::size_t>(threads ? threads : 1, n);
  if (t <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (std::size_t i = 0; i < t; ++i) {
    std::size_t begin = n * i / t;
    std::size_t end = n * (i + 1) / t;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace copim
