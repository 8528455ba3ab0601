#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace surfpde {

namespace detail {
inline std::atomic<int>& default_thread_slot() {
  static std::atomic<int> slot{0}; // 0 = not yet resolved
  return slot;
}
} // namespace detail

/// Default worker count for element-parallel loops. Resolved once from the
/// SURFPDE_NUM_THREADS environment variable; 1 (fully sequential) when unset
/// or invalid. Results are identical for any thread count because parallel
/// sections only ever write disjoint output slots.
inline int default_threads() {
  int cur = detail::default_thread_slot().load(std::memory_order_relaxed);
  if (cur > 0) return cur;
  int resolved = 1;
  if (const char* env = std::getenv("SURFPDE_NUM_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1 && v <= 256) resolved = v;
  }
  detail::default_thread_slot().store(resolved, std::memory_order_relaxed);
  return resolved;
}

/// Override the default worker count (CLI --threads flag).
inline void set_default_threads(int n) {
  if (n >= 1 && n <= 256) detail::default_thread_slot().store(n, std::memory_order_relaxed);
}

/// Run fn(i) for i in [0, n). The body must only write state owned by
/// iteration i, so the result does not depend on the thread count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, int threads = 0) {
  if (threads <= 0) threads = default_threads();
  if (threads == 1 || n < 4096) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t begin = w * chunk;
    std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

} // namespace surfpde
