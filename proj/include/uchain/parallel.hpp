#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace uchain {

namespace detail {

inline unsigned threads_from_env() {
  if (const char* raw = std::getenv("UCHAIN_THREADS")) {
    try {
      long v = std::stol(raw);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline std::atomic<unsigned>& thread_limit_slot() {
  static std::atomic<unsigned> slot{threads_from_env()};
  return slot;
}

}  // namespace detail

/// Upper bound on worker threads used by the library's internal loops.
/// Defaults to UCHAIN_THREADS, else the hardware concurrency.
inline unsigned thread_limit() { return detail::thread_limit_slot().load(); }
inline void set_thread_limit(unsigned n) { detail::thread_limit_slot().store(std::max(1u, n)); }

// Runs body(i) for i in [0, count). Work is split into contiguous chunks;
// body must only write to slots owned by i, so results never depend on the
// number of threads.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(thread_limit(), count / 64 + 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
}

}  // namespace uchain
