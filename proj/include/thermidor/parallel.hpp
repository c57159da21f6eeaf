#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace thermidor {

/// Runs fn(chunk_index, begin, end) on contiguous index chunks, one per
/// worker thread. Deterministic partition for a fixed thread count.
inline void parallel_chunks(int n, const std::function<void(int, int, int)>& fn,
                            int n_threads = 0) {
  if (n_threads <= 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, std::max(1, n));
  const int chunk = (n + n_threads - 1) / n_threads;
  std::vector<std::thread> workers;
  for (int c = 0; c < n_threads; ++c) {
    const int begin = c * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back(fn, c, begin, end);
  }
  for (auto& w : workers) w.join();
}

}  // namespace thermidor
