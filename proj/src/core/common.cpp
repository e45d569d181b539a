#include "core/common.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>

namespace jumper {

int worker_count() {
  if (const char* env = std::getenv("JUMPER_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t, int)>& fn) {
  if (n == 0) return;
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  const std::size_t chunk = (n + w - 1) / w;
  std::vector<std::thread> threads;
  std::exception_ptr first_error;
  std::mutex error_mu;
  threads.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    threads.emplace_back([&, lo, hi, t] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i, static_cast<int>(t));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace jumper
