#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace spreadpool {

/// Number of workers to use when the caller passes 0.
inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Splits [0, count) into `workers` contiguous blocks and runs
/// fn(begin, end, worker_index) on each, one thread per block. The first
/// exception thrown by any block is rethrown after all threads join.
template <typename Fn>
void parallel_for(unsigned workers, std::size_t count, Fn&& fn) {
  if (workers == 0) workers = default_workers();
  const std::size_t blocks = std::min<std::size_t>(workers, count);
  if (blocks <= 1) {
    if (count > 0) fn(std::size_t{0}, count, 0u);
    return;
  }
  std::vector<std::exception_ptr> errors(blocks);
  {
    std::vector<std::jthread> threads;
    threads.reserve(blocks - 1);
    auto run = [&](std::size_t b) {
      const std::size_t begin = count * b / blocks;
      const std::size_t end = count * (b + 1) / blocks;
      try {
        fn(begin, end, static_cast<unsigned>(b));
      } catch (...) {
        errors[b] = std::current_exception();
      }
    };
    for (std::size_t b = 1; b < blocks; ++b) threads.emplace_back(run, b);
    run(0);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace spreadpool
