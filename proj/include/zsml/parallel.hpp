#ifndef ZSML_PARALLEL_HPP
#define ZSML_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <utility>
#include <vector>

namespace zsml {

// Worker budget for per-instance loops. ZSML_THREADS overrides when set.
inline int thread_budget() {
  if (const char* env = std::getenv("ZSML_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static chunking over [0, n). f(i) must be independent across i; results
// are deterministic regardless of how the chunks are scheduled.
template <typename F>
void parallel_for(int n, F&& f) {
  const int workers = std::min(thread_budget(), n);
  if (workers <= 1 || n < 32) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &f] {
      for (int i = begin; i < end; ++i) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

} // namespace zsml

#endif // ZSML_PARALLEL_HPP
