#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace drr {

/// Worker count for a request of `threads` (0 = hardware concurrency).
inline unsigned resolve_threads(unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  return threads;
}

/// Runs fn(begin, end) over contiguous blocks of [0, count). Blocks are
/// disjoint, so per-item results do not depend on the partition.
template <class Fn>
void parallel_blocks(int count, unsigned threads, Fn&& fn) {
  const int workers = static_cast<int>(std::min<unsigned>(resolve_threads(threads), std::max(count, 1)));
  if (workers <= 1) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const int chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace drr
