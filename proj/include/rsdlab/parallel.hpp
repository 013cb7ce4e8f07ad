#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace rsdlab {

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(worker, rep) for rep in [0, reps) across `workers` threads.
// Replications are handed out dynamically; callers must make each
// replication's result independent of scheduling (seed by rep index,
// aggregate with order-independent arithmetic).
template <class Body>
void parallel_replications(std::int64_t reps, int workers, Body&& body) {
  workers = resolve_workers(workers);
  if (workers > reps) workers = static_cast<int>(reps > 0 ? reps : 1);
  if (workers <= 1) {
    for (std::int64_t r = 0; r < reps; ++r) body(0, r);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        // chunked claims keep the counter off the hot path on big rep counts
        const std::int64_t chunk = reps >= 4096 ? 16 : 1;
        while (!failed.load(std::memory_order_relaxed)) {
          std::int64_t begin = next.fetch_add(chunk, std::memory_order_relaxed);
          if (begin >= reps) break;
          std::int64_t end = begin + chunk < reps ? begin + chunk : reps;
          for (std::int64_t r = begin; r < end; ++r) body(w, r);
        }
      } catch (...) {
        bool expected = false;
        if (failed.compare_exchange_strong(expected, true)) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rsdlab
