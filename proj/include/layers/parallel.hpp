#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace layers {

/// Runs fn(t) for t in [0, count) on up to `workers` threads and returns the
/// results indexed by t. fn must depend only on t (and shared read-only
/// state), so the output is the same for every worker count.
template <class R, class Fn>
std::vector<R> parallel_trials(std::uint64_t count, unsigned workers, Fn&& fn) {
  std::vector<R> results(count);
  if (workers <= 1 || count <= 1) {
    for (std::uint64_t t = 0; t < count; ++t) results[t] = fn(t);
    return results;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::uint64_t t = next.fetch_add(1);
      if (t >= count) return;
      try {
        results[t] = fn(t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const auto n = static_cast<unsigned>(std::min<std::uint64_t>(workers, count));
  pool.reserve(n);
  for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace layers
