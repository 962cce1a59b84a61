#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace glt {

// Execution policy for the data-parallel kernels. Every kernel has a serial
// path that is kept as the reference implementation; the parallel path must
// produce bit-identical results (no cross-thread reductions, or reductions
// carried out in a fixed order after the parallel region).
enum class Exec {
    serial,
    parallel,
};

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

template <class Fn>
void parallel_for(std::size_t n, Exec exec, Fn&& fn) {
#ifdef _OPENMP
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            fn(static_cast<std::size_t>(i));
        return;
    }
#else
    (void)exec;
#endif
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace glt
