#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ringeq {

inline unsigned default_threads() {
  const unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : h;
}

/// Static partition of [0, count) over `threads` workers. Each index is
/// handled by exactly one worker, so per-index results do not depend on the
/// thread count. The first exception thrown is rethrown on the caller.
template <class F>
void parallel_for(std::size_t count, F&& fn, unsigned threads = default_threads()) {
  if (threads <= 1 || count < 2 * static_cast<std::size_t>(threads)) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        const std::size_t begin = count * t / threads;
        const std::size_t end = count * (t + 1) / threads;
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace ringeq
