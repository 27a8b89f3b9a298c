#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace stnlmc {

// Runs fn(k) for k in [0, n) on up to `threads` workers with dynamic scheduling. Callers write
// results into per-index slots, so output does not depend on the schedule.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex errorMutex;
  std::vector<std::jthread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int k = next++; k < n; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard lock(errorMutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace stnlmc
