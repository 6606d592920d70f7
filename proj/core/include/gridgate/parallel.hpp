#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace gridgate {

/// Worker count: min(hardware, GRIDGATE_THREADS when set). At least 1.
inline unsigned worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("GRIDGATE_THREADS")) {
    long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && (unsigned)cap < hw) hw = (unsigned)cap;
  }
  return hw;
}

/// Runs fn(i) for i in [0, n) across workers. fn must only touch slot i of
/// any shared output so that assembly stays deterministic.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  const unsigned workers = std::min<unsigned>(worker_count(), n > 0 ? (unsigned)n : 1u);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<int> next{0};
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace gridgate
