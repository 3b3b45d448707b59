#pragma once

// OpenBLAS picks its kernels once, when the library loads. On some recent
// x86 cores the autodetected kernel set returns wrong eigenvectors from
// dsyevd without reporting an error. Pinning OPENBLAS_CORETYPE=Haswell
// avoids it; because the variable is read at load time, a process that
// wants the pin must set it and re-execute itself.

#include <cstdlib>
#include <cstring>

#if defined(__linux__)
#include <unistd.h>
#endif

namespace magrelax {

inline constexpr const char* kCoretypeEnv = "OPENBLAS_CORETYPE";

// Returns only when no re-exec happened (variable already set, CPU without
// AVX2, or exec failure).
inline void pin_blas_coretype(char** argv) {
#if defined(__linux__) && (defined(__x86_64__) || defined(__i386__))
    if (std::getenv(kCoretypeEnv) != nullptr) return;
    if (!__builtin_cpu_supports("avx2")) return;
    if (setenv(kCoretypeEnv, "Haswell", 1) != 0) return;
    execv("/proc/self/exe", argv);
#else
    (void)argv;
#endif
}

} // namespace magrelax
