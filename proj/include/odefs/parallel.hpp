#pragma once

#ifdef _OPENMP
#include <omp.h>
#else
inline int omp_get_max_threads() { return 1; }
inline int omp_get_thread_num() { return 0; }
#endif

namespace odefs {

/// 0 or negative means "use all available threads".
inline int resolve_threads(int requested) {
    return requested > 0 ? requested : omp_get_max_threads();
}

}  // namespace odefs
