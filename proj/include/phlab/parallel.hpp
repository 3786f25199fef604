#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace phlab {

// Splits [0, n) into `threads` contiguous chunks; fn(begin, end, worker). The first exception
// raised by any worker is rethrown after all workers have joined.
inline void parallel_for(size_t n, int threads, const std::function<void(size_t, size_t, int)>& fn) {
  const int workers = static_cast<int>(std::max<size_t>(1, std::min<size_t>(static_cast<size_t>(std::max(threads, 1)), n)));
  if (workers == 1) {
    fn(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex mu;
  for (int w = 0; w < workers; ++w) {
    const size_t begin = n * static_cast<size_t>(w) / static_cast<size_t>(workers);
    const size_t end = n * static_cast<size_t>(w + 1) / static_cast<size_t>(workers);
    pool.emplace_back([&, begin, end, w] {
      try {
        fn(begin, end, w);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace phlab
