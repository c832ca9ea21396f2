#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace orthant_lab {

/// Number of work chunks for sampled integrals. Fixed so that reductions do
/// not depend on the thread count.
inline constexpr int kDefaultChunks = 64;

/// Thread count from ORTHANT_LAB_THREADS, else the hardware concurrency.
inline int default_threads() {
  if (const char* env = std::getenv("ORTHANT_LAB_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Calls body(i) for every i in [0, count) on up to `threads` workers.
/// The body must write its result to a slot owned by i; the first exception
/// thrown by any worker is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
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
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 0; t + 1 < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Size of chunk `i` when `n` items are split into `chunks` near-equal parts.
inline std::int64_t chunk_size(std::int64_t n, int chunks, int i) {
  const std::int64_t base = n / chunks;
  return base + (i < n % chunks ? 1 : 0);
}

/// Options shared by the sampled-integral engines.
struct McOptions {
  std::uint64_t seed = 42;
  int chunks = kDefaultChunks;
  int threads = 1;
};

}  // namespace orthant_lab
