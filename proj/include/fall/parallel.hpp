#pragma once

#include "fall/types.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fall {

/// Runs fn(i) for i in [0, count) over `threads` workers using contiguous
/// static chunks. Callers write results into disjoint slots, so the output
/// does not depend on the thread count. The first exception thrown by any
/// worker is rethrown on the calling thread.
template <typename Fn>
void parallel_for(Index count, int threads, Fn&& fn) {
  if (count <= 0) return;
  const Index workers = std::clamp<Index>(threads, 1, count);
  if (workers == 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const Index chunk = count / workers;
    const Index extra = count % workers;
    Index begin = 0;
    for (Index w = 0; w < workers; ++w) {
      const Index end = begin + chunk + (w < extra ? 1 : 0);
      pool.emplace_back([&, begin, end] {
        try {
          for (Index i = begin; i < end; ++i) fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
      begin = end;
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fall
