// Copyright (c) 2026 the bandmat authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace bandmat {

/// Runs fn(i) for i in [0, count) across `workers` threads in contiguous
/// chunks. Callers write results into per-index slots and reduce serially
/// afterwards, so the outcome is independent of the partition.
inline void parallel_for(long count, int workers,
                         const std::function<void(long)>& fn) {
  if (workers <= 1 || count < 2) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  const int nthreads = static_cast<int>(std::min<long>(workers, count));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nthreads);
  const long chunk = (count + nthreads - 1) / nthreads;
  for (int t = 0; t < nthreads; ++t) {
    const long lo = t * chunk;
    const long hi = std::min(count, lo + chunk);
    pool.emplace_back([&, lo, hi, t] {
      try {
        for (long i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace bandmat
