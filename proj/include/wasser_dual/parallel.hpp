#pragma once

// Thread-count control shared by every OpenMP kernel in the library.
//
// WASSER_DUAL_THREADS caps the team size (0 or unset = OpenMP default).
// Kernels only parallelize loops whose iterations write disjoint outputs,
// so results do not depend on the thread count.

#include <cstddef>
#include <exception>

namespace wd {

/// Number of threads kernels should request.
int thread_count();

/// Overrides the cap for the rest of the process; 0 restores the default.
void set_thread_cap(int cap);

/// Re-reads WASSER_DUAL_THREADS.
void reload_thread_cap_from_env();

/// Runs body(i) for i in [0, count) with dynamic scheduling. The first
/// exception thrown by any iteration is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  std::exception_ptr failure;
  const auto n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
  for (long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(wd_parallel_for_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace wd
