#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sneakbp::harness {

inline int default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

/// Evaluates fn(i) for i in [begin, end) on up to `threads` workers and
/// returns the results in index order, so any reduction over them is
/// independent of the worker count. The first exception is rethrown.
template <typename Fn>
auto parallel_map(long begin, long end, int threads, Fn&& fn) {
  using Result = decltype(fn(begin));
  const long count = std::max(0L, end - begin);
  std::vector<Result> out(static_cast<std::size_t>(count));
  const int workers = static_cast<int>(std::min<long>(std::max(1, threads), std::max(1L, count)));
  if (workers <= 1) {
    for (long i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = fn(begin + i);
    return out;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (long i = next++; i < count; i = next++) {
      try {
        out[static_cast<std::size_t>(i)] = fn(begin + i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace sneakbp::harness
