#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace boson_owf {

/// Worker count used when a caller passes 0. Overridable process-wide so the
/// CLI's --threads flag reaches every parallel loop.
inline std::atomic<unsigned>& default_thread_count() {
  static std::atomic<unsigned> count{0};
  return count;
}

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned configured = default_thread_count().load();
  if (configured != 0) return configured;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for every i in [0, count). Work is handed out in index order
/// from a shared counter; bodies must write only to slots owned by i, which
/// makes the result independent of the worker count. The first exception
/// thrown by any body is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t count, Body&& body, unsigned threads = 0) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

/// parallel_for over [0, count) in contiguous chunks of at most `grain`.
template <typename Body>
void parallel_for_chunked(std::size_t count, std::size_t grain, Body&& body,
                          unsigned threads = 0) {
  grain = std::max<std::size_t>(grain, 1);
  const std::size_t chunks = (count + grain - 1) / grain;
  parallel_for(
      chunks,
      [&](std::size_t c) {
        const std::size_t begin = c * grain;
        const std::size_t end = std::min(count, begin + grain);
        body(begin, end);
      },
      threads);
}

}  // namespace boson_owf
