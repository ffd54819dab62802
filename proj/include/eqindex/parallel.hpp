#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace eqindex {

/// Worker cap: EQINDEX_THREADS if set and positive, else the hardware count.
inline int thread_count() {
  if (const char* env = std::getenv("EQINDEX_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return std::max(1, int(std::thread::hardware_concurrency()));
}

/// Evaluates fn(0..n-1) on up to `threads` workers; results keep index order,
/// so merging downstream is independent of scheduling. The first exception
/// (by index) is rethrown.
template <class Fn>
auto parallel_map(int n, Fn&& fn, int threads = thread_count()) {
  using R = decltype(fn(0));
  std::vector<R> out(std::size_t(std::max(n, 0)));
  std::vector<std::exception_ptr> errors(out.size());
  threads = std::max(1, std::min(threads, n));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += threads) {
        try {
          out[i] = fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace eqindex
