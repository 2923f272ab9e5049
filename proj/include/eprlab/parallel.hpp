#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace eprlab {

inline int default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Runs fn(i) for i in [0, count) across `workers` threads. Work is keyed
// by index, so any per-index output gathered into a preallocated array is
// identical for every worker count; reductions over such arrays must then
// be done sequentially by the caller.
template <typename Fn>
void parallel_for_index(std::size_t count, int workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += nw) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace eprlab
