#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <span>
#include <thread>
#include <vector>

namespace coreset {

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> value{0};
  return value;
}
}  // namespace detail

/// 0 means "all available cores".
inline void set_num_threads(int threads) { detail::thread_setting() = std::max(threads, 0); }

inline int num_threads() {
  int t = detail::thread_setting();
  if (t > 0) return t;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Runs fn(i) for i in [0, n). Each index is visited exactly once, so any
/// per-index output is independent of the thread count.
template <class Fn>
void parallel_for(std::ptrdiff_t n, Fn&& fn, std::ptrdiff_t grain = 64) {
  const int threads = num_threads();
  if (threads <= 1 || n <= grain) {
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::ptrdiff_t workers = std::min<std::ptrdiff_t>(threads, (n + grain - 1) / grain);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  pool.reserve(static_cast<std::size_t>(workers));
  for (std::ptrdiff_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::ptrdiff_t begin = n * w / workers;
        const std::ptrdiff_t end = n * (w + 1) / workers;
        for (std::ptrdiff_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Pairwise summation with fan-in 2 over blocks of 8; the reduction tree
/// depends only on the length.
inline double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace coreset
