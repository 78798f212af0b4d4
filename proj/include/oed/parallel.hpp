#ifndef OED_PARALLEL_HPP
#define OED_PARALLEL_HPP

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace oed {

// Worker cap: OED_THREADS if set, else hardware concurrency.
inline int max_threads() {
  if (const char* env = std::getenv("OED_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(begin, end) over contiguous chunks of [0, n). Results must be
// written to per-index slots (or per-chunk slots) so the outcome does not
// depend on scheduling.
inline void parallel_for(int n, const std::function<void(int, int)>& fn) {
  const int workers = std::min(max_threads(), std::max(1, n));
  if (workers <= 1 || n < 256) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace oed

#endif
