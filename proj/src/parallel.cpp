#include "parweight/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace parweight {

int default_threads() {
  if (const char* env = std::getenv("PARWEIGHT_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  int nt = threads > 0 ? threads : default_threads();
  nt = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(nt), count));
  if (nt <= 1) {
    fn(0, count);
    return;
  }
  std::size_t chunk = (count + nt - 1) / nt;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nt));
  for (int k = 0; k < nt; ++k) {
    std::size_t begin = static_cast<std::size_t>(k) * chunk;
    if (begin >= count) break;
    std::size_t end = std::min(count, begin + chunk);
    pool.emplace_back([begin, end, &fn] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace parweight
