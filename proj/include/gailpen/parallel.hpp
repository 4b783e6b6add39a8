#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace gailpen {

// Runs fn(i) for i in [0, count). With workers <= 1 the loop is serial;
// otherwise contiguous index chunks run on plain threads. Callers must write
// only to disjoint per-index outputs, so the result does not depend on the
// worker count.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  const std::size_t chunk = (count + n_threads - 1) / n_threads;
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace gailpen
