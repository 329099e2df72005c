#pragma once
// Thin OpenMP wrapper. Results must be written by index into preallocated
// storage so serial and parallel execution produce identical bytes.

#include <cstdint>

#ifdef ZOLL_HAVE_OPENMP
#include <omp.h>
#endif

namespace zoll::par {

// 0 = library default; 1 = serial reference path
void set_threads(int n);
int threads();

template <class F>
void parallel_for(std::int64_t n, F&& body) {
#ifdef ZOLL_HAVE_OPENMP
  if (threads() != 1) {
    int t = threads();
#pragma omp parallel for schedule(dynamic) num_threads(t > 0 ? t : omp_get_max_threads())
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
#endif
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace zoll::par
