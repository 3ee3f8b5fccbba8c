#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace microcircuit {

/// Worker count from MICROCIRCUIT_WORKERS, else hardware concurrency (>= 1).
int default_worker_count();

/// Contiguous block [begin, end) of `n` items owned by `worker` of `workers`.
inline std::pair<std::size_t, std::size_t> partition_range(std::size_t n, int workers, int worker) {
  const std::size_t w = static_cast<std::size_t>(workers);
  const std::size_t i = static_cast<std::size_t>(worker);
  return {n * i / w, n * (i + 1) / w};
}

/// Calls fn(begin, end) on `workers` contiguous blocks of [0, n).
template <typename Fn>
void parallel_for(int workers, std::size_t n, Fn&& fn) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const auto [b, e] = partition_range(n, workers, w);
    threads.emplace_back([&fn, b = b, e = e] { fn(b, e); });
  }
}

}  // namespace microcircuit
