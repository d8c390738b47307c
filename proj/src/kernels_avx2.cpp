#include "enkg/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define ENKG_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#endif

namespace enkg::kernels::avx2 {

#if defined(ENKG_HAVE_AVX2_BUILD)

bool available() {
    return __builtin_cpu_supports("avx2");
}

__attribute__((target("avx2"))) double max_value(std::span<const double> x) {
    const size_t n = x.size();
    if (n < 8) {
        return scalar::max_value(x);
    }
    const double * p = x.data();
    __m256d vmax = _mm256_loadu_pd(p);
    size_t i = 4;
    const size_t n4 = n & ~size_t(3);
    for (; i < n4; i += 4) {
        vmax = _mm256_max_pd(vmax, _mm256_loadu_pd(p + i));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, vmax);
    double m = lanes[0];
    for (int k = 1; k < 4; ++k) {
        if (lanes[k] > m) {
            m = lanes[k];
        }
    }
    for (; i < n; ++i) {
        if (p[i] > m) {
            m = p[i];
        }
    }
    return m;
}

size_t argmax(std::span<const double> x) {
    // max is exact under any reduction order, so locate the first
    // occurrence of the vector max; ties resolve to the lowest index.
    const double m = max_value(x);
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] == m) {
            return i;
        }
    }
    return 0;
}

__attribute__((target("avx2"))) double sum(std::span<const double> x) {
    const size_t n = x.size();
    if (n < 8) {
        return scalar::sum(x);
    }
    const double * p = x.data();
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    const size_t n4 = n & ~size_t(3);
    for (; i < n4; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(p + i));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    // Combine order must match the scalar reference exactly.
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) {
        s += p[i];
    }
    return s;
}

__attribute__((target("avx2"))) void scale(std::span<double> x, double factor) {
    const size_t n = x.size();
    double * p = x.data();
    const __m256d vf = _mm256_set1_pd(factor);
    size_t i = 0;
    const size_t n4 = n & ~size_t(3);
    for (; i < n4; i += 4) {
        _mm256_storeu_pd(p + i, _mm256_mul_pd(_mm256_loadu_pd(p + i), vf));
    }
    for (; i < n; ++i) {
        p[i] *= factor;
    }
}

#else // non-x86 build: route to the scalar reference

bool available() {
    return false;
}

double max_value(std::span<const double> x) {
    return scalar::max_value(x);
}

size_t argmax(std::span<const double> x) {
    return scalar::argmax(x);
}

double sum(std::span<const double> x) {
    return scalar::sum(x);
}

void scale(std::span<double> x, double factor) {
    scalar::scale(x, factor);
}

#endif

} // namespace enkg::kernels::avx2
