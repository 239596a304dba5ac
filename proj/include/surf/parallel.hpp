#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace surf {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Parallel loop over [0, n). Serial fallback avoids per-call OpenMP region
// overhead in single-threaded runs (training spawns millions of small loops).
template <typename F>
void parallel_for(std::int64_t n, F&& f) {
#ifdef _OPENMP
  if (omp_get_max_threads() > 1 && n > 1) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      f(i);
    }
    return;
  }
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    f(i);
  }
}

}  // namespace surf
