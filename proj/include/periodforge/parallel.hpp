#pragma once

// Index-parallel loops with a global worker cap taken from
// PERIODFORGE_MAX_THREADS. Each index writes only its own output slot, so
// results do not depend on scheduling. Nested calls run inline.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace periodforge {

inline int maxThreads() {
  if (const char* env = std::getenv("PERIODFORGE_MAX_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {
inline thread_local bool tInParallel = false;
}

template <class F>
void parallelFor(size_t count, F&& fn) {
  const size_t workers = std::min<size_t>(static_cast<size_t>(maxThreads()), count);
  if (workers <= 1 || detail::tInParallel) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<size_t> next{0};
  auto work = [&] {
    detail::tInParallel = true;
    for (size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    detail::tInParallel = false;
  };
  std::vector<std::thread> pool;
  for (size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  // lowest failing index wins, independent of timing
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace periodforge
