#pragma once

#include "dcrf/types.hpp"

#include <cstddef>

namespace dcrf {

int max_threads();

// Keeps large blocks on the heap instead of returning them to the OS after every solver
// iteration. Call once at program start; a no-op outside glibc.
void tune_allocator();

// Runs f(i) for i in [begin, end). Iterations must be independent.
template <class F>
void parallel_for(Index begin, Index end, Execution exec, F&& f) {
  if (exec == Execution::Serial) {
    for (Index i = begin; i < end; ++i) f(i);
    return;
  }
#pragma omp parallel for schedule(static)
  for (Index i = begin; i < end; ++i) f(i);
}

}  // namespace dcrf
