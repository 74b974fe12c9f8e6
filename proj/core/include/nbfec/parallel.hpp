#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace nbfec {

// Runs fn(0) .. fn(n-1) on up to `workers` threads. Work items must be
// independent; determinism comes from items writing to their own slots and
// drawing from their own derived seeds, never from scheduling order.
inline void parallel_for(size_t n, int workers,
                         const std::function<void(size_t)>& fn) {
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  size_t nthreads = std::min<size_t>(static_cast<size_t>(workers), n);
  std::atomic<size_t> cursor{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      size_t i = cursor.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(nthreads);
  for (size_t t = 0; t < nthreads; ++t) threads.emplace_back(run);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

// Compensated (Kahan) accumulator.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    double y = v - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

inline constexpr size_t kReduceChunk = 4096;

// Sum of term(i) for i in [0, n) with Kahan compensation inside fixed-size
// chunks and across chunks in index order. The partition does not depend
// on the worker count, so the result is bit-identical for any `workers`.
inline double chunked_kahan_sum(size_t n, int workers,
                                const std::function<double(size_t)>& term) {
  size_t nchunks = (n + kReduceChunk - 1) / kReduceChunk;
  std::vector<double> partial(nchunks, 0.0);
  parallel_for(nchunks, workers, [&](size_t ci) {
    size_t lo = ci * kReduceChunk;
    size_t hi = std::min(n, lo + kReduceChunk);
    KahanSum acc;
    for (size_t i = lo; i < hi; ++i) acc.add(term(i));
    partial[ci] = acc.sum;
  });
  KahanSum total;
  for (double v : partial) total.add(v);
  return total.sum;
}

}  // namespace nbfec
