#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace kincall {

/// Runs fn(chunk, begin, end) over `workers` contiguous slices of [0, n).
/// Slice boundaries depend only on n and workers.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, workers);
  if (workers == 1 || n < 2) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    threads.emplace_back([&fn, w, begin, end] { fn(static_cast<std::size_t>(w), begin, end); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace kincall
