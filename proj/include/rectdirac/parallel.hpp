#pragma once

// Parameter-point parallelism. jobs <= 1 runs the plain serial loop, which
// doubles as the reference the OpenMP path is tested against.

#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rectdirac {

/// Calls f(i) for i in [0, count). Every index runs even if some throw; the
/// exception of the lowest failing index is rethrown afterwards.
template <class F>
void for_each_index(std::size_t count, int jobs, F&& f) {
  std::vector<std::exception_ptr> errors(count);
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
#ifdef _OPENMP
    const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
    for (long long i = 0; i < n; ++i) {
      try {
        f(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
#else
    for (std::size_t i = 0; i < count; ++i) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
#endif
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

/// Number of hardware threads OpenMP would use by default (1 without OpenMP).
inline int default_jobs() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace rectdirac
