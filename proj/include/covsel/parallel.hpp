#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace covsel {

// Every parallel kernel in the library has a serial twin selected by this
// switch. Serial is the reference implementation; the OpenMP path must
// produce bit-identical results (each index writes only its own slot, no
// cross-index reductions).
enum class ExecMode { Serial, OpenMp };

inline const char* to_string(ExecMode m) {
    return m == ExecMode::Serial ? "serial" : "openmp";
}

inline int worker_count(ExecMode m) {
#ifdef _OPENMP
    return m == ExecMode::OpenMp ? omp_get_max_threads() : 1;
#else
    (void)m;
    return 1;
#endif
}

// Runs body(i) for i in [0, n). Exceptions from the OpenMP path are captured
// and rethrown on the calling thread (lowest index wins, so the error
// reported does not depend on scheduling).
template <typename Body>
void parallel_for(std::size_t n, ExecMode mode, Body&& body) {
#ifdef _OPENMP
    if (mode == ExecMode::OpenMp) {
        std::exception_ptr err = nullptr;
        std::size_t err_index = n;
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical(covsel_parallel_for_err)
                {
                    if (static_cast<std::size_t>(i) < err_index) {
                        err_index = static_cast<std::size_t>(i);
                        err = std::current_exception();
                    }
                }
            }
        }
        if (err)
            std::rethrow_exception(err);
        return;
    }
#endif
    (void)mode;
    for (std::size_t i = 0; i < n; ++i)
        body(i);
}

} // namespace covsel
