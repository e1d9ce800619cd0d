#include "palletproj/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace palletproj {

int effective_threads(int requested) {
  int n = requested;
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char *env = std::getenv("PALLETPROJ_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, n);
}

void parallel_for(int begin, int end, int threads,
                  const std::function<void(int, int)> &chunk_fn) {
  const int count = end - begin;
  if (count <= 0) return;
  const int workers = std::min(std::max(1, threads), count);
  if (workers == 1) {
    chunk_fn(begin, end);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  const int base = count / workers, extra = count % workers;
  int cursor = begin;
  for (int w = 0; w < workers; ++w) {
    const int size = base + (w < extra ? 1 : 0);
    const int lo = cursor, hi = cursor + size;
    cursor = hi;
    pool.emplace_back([&chunk_fn, lo, hi] { chunk_fn(lo, hi); });
  }
  for (std::thread &t : pool) t.join();
}

}  // namespace palletproj
