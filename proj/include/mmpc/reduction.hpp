#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace mmpc {

// Pairwise summation over a fixed index-ordered tree. The tree shape depends
// only on the element count, never on thread scheduling, so the result is
// bit-identical for any worker count.
inline double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n == 1) return values[0];
  if (n == 2) return values[0] + values[1];
  const std::size_t half = n / 2;
  return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& values) {
  return pairwise_sum(std::span<const double>(values));
}

// Runs body(i) for i in [0, count). Each index writes only to its own output
// slot, so the partitioning across workers cannot affect results.
inline void parallel_for(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  if (workers > count) workers = static_cast<unsigned>(count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Process-wide worker count used by sample generation and rate evaluation.
// Changing it never changes numerical results, only wall time.
inline unsigned& global_worker_count() {
  static unsigned workers = 1;
  return workers;
}

}  // namespace mmpc
