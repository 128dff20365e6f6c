#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace matphi {

// Calls body(i) for i in [0, count) on up to `jobs` threads. If bodies throw, the exception of the
// lowest index is rethrown, so failures do not depend on scheduling.
template <class Body>
void parallel_for(std::int64_t count, int jobs, Body&& body) {
  if (count <= 0) return;
  const int workers = static_cast<int>(std::clamp<std::int64_t>(jobs, 1, count));
  if (workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::mutex mu;
  std::int64_t failed_index = count;
  std::exception_ptr failure;
  auto work = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace matphi
