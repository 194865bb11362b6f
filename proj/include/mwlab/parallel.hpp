#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

#include "mwlab/types.hpp"

namespace mwlab {

/// Runs fn(i) for i in [0, count) on `workers` threads, each owning a
/// contiguous slice. Callers write results into per-index slots, so the
/// outcome is independent of the worker count. The first exception thrown by
/// any worker is rethrown after all threads join.
template <typename Fn>
void parallel_for(Index count, Index workers, Fn&& fn) {
  workers = std::clamp<Index>(workers, 1, std::max<Index>(count, 1));
  if (workers == 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    const Index begin = count * w / workers;
    const Index end = count * (w + 1) / workers;
    threads.emplace_back([&, w, begin, end] {
      try {
        for (Index i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mwlab
