#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace kinchain {

inline unsigned default_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

/// Run body(i) for i in [0, n). Each index must be independent; results
/// belonging to index i must be written to slot i of a preallocated buffer
/// so reductions stay deterministic regardless of the thread count.
template <class Body>
void parallel_for(std::size_t n, Body&& body, unsigned n_threads = 0) {
  if (n_threads == 0) n_threads = default_threads();
  if (n_threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n));
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += n_threads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace kinchain
