#pragma once

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace biphoton {

// Worker count for parallel loops.  BIPHOTON_THREADS caps it when set;
// results never depend on the value, only wall time does.
inline int parallel_thread_count() {
#ifdef _OPENMP
    int n = omp_get_max_threads();
#else
    int n = 1;
#endif
    if (const char* env = std::getenv("BIPHOTON_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1 && cap < n) n = cap;
    }
    return n;
}

}  // namespace biphoton
