#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace tvlab {

// Worker cap: TVLAB_THREADS, else hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("TVLAB_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? int(hc) : 1;
}

// Runs fn(i) for i in [0, count). Each index writes only its own result slot,
// so the output is identical for any worker count.
template <typename Fn>
void parallel_for(std::size_t count, Fn fn) {
  int workers = worker_count();
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  int spawn = std::min<std::size_t>(workers, count) - 1;
  pool.reserve(spawn);
  for (int t = 0; t < spawn; ++t) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
}

}  // namespace tvlab
