#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace viewrace {

/// Worker count: hardware concurrency, capped by VIEWRACE_THREADS when set.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("VIEWRACE_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (...) {
    }
  }
  return n;
}

/// Calls fn(k) for k in [0, n) over contiguous blocks, one per worker.
/// fn must only write to slots owned by k.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t end = std::min(n, (w + 1) * block);
        for (std::size_t k = w * block; k < end; ++k) fn(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace viewrace
