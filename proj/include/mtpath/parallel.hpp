#pragma once

#include <cstddef>
#include <exception>

#ifdef MTPATH_HAVE_OPENMP
#include <omp.h>
#endif

// Map-only parallelism: fn(i) must write exclusively to slot i of
// preallocated outputs, so results are identical for any schedule or
// thread count. The first exception thrown by any iteration is rethrown.

namespace mtpath {

inline int effective_threads(int requested) {
  if (requested < 1) requested = 1;
#ifndef MTPATH_HAVE_OPENMP
  requested = 1;
#endif
  return requested;
}

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  threads = effective_threads(threads);
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
#ifdef MTPATH_HAVE_OPENMP
  std::exception_ptr err;
#pragma omp parallel for num_threads(threads) schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical
      {
        if (!err) err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
#else
  for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace mtpath
