#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "gpso/error.hpp"

namespace gpso {

// Runs body(i) for i in [0, count) across `workers` threads. Each body call
// must write its result into a slot owned by index i; the caller reduces in
// index order afterward, so results are identical for any worker count.
inline void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body) {
  if (workers < 1) throw ConfigError("parallel_for: workers must be >= 1");
  if (count == 0) return;
  if (workers == 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };

  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace gpso
