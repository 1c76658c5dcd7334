#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace soilspec {

// Runs fn(i) for i in [begin, end) on up to `jobs` threads. Work items pull
// from a shared counter; callers must write results into per-index slots so
// the outcome is identical for any job count. The first worker exception is
// rethrown on the calling thread.
inline void parallel_for(int begin, int end, int jobs,
                         const std::function<void(int)>& fn) {
  if (end <= begin) return;
  if (jobs <= 1 || end - begin == 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::atomic<int> next(begin);
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= end) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(end);
        break;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min(jobs, end - begin);
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace soilspec
