#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hsgraph {

/// Splits [0, n) into `chunks` contiguous ranges and runs
/// `fn(chunk, begin, end)` for each, on up to hardware_concurrency threads.
///
/// The partition depends only on n and `chunks`, never on the thread count,
/// so callers that keep one accumulator per chunk and reduce them in chunk
/// order get bit-identical floating-point results on every machine.
template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t chunks, Fn&& fn) {
  if (n == 0) return;
  chunks = std::clamp<std::size_t>(chunks, 1, n);
  const auto bounds = [&](std::size_t c) { return c * n / chunks; };
  const std::size_t workers =
      std::min<std::size_t>(chunks, std::max(1u, std::thread::hardware_concurrency()));
  if (workers == 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c, bounds(c), bounds(c + 1));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      try {
        fn(c, bounds(c), bounds(c + 1));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace hsgraph
