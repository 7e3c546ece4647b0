#include "netblock/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace netblock {

int max_threads() {
  if (const char* env = std::getenv("NETBLOCK_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t >= 1) return t;
    } catch (...) {
      // fall through to the hardware default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(max_threads()), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = count * t / threads;
    const std::size_t hi = count * (t + 1) / threads;
    pool.emplace_back([&, t, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace netblock
