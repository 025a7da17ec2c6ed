#pragma once

#include <cstdint>
#include <exception>

namespace qedlab {

// Every kernel in the library is a loop over independent elements (grid
// points, frequency bins, sweep entries). Exec::parallel runs it under
// OpenMP, Exec::serial is the plain-loop reference. Both orders compute
// each element from scratch, so the two paths produce identical bytes.
// An exception thrown by the body is captured and rethrown after the
// region (exceptions must not unwind out of an OpenMP loop).
enum class Exec { serial, parallel };

template <typename F>
void parallel_for(std::int64_t n, Exec exec, F&& body) {
#ifdef _OPENMP
  if (exec == Exec::parallel) {
    std::exception_ptr error;
#pragma omp parallel for schedule(static) shared(error)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
#pragma omp critical(qedlab_parallel_for_error)
        if (!error) {
          error = std::current_exception();
        }
      }
    }
    if (error) {
      std::rethrow_exception(error);
    }
    return;
  }
#else
  (void)exec;
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    body(i);
  }
}

}  // namespace qedlab
