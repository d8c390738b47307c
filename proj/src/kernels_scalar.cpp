#include "enkg/kernels.hpp"

namespace enkg::kernels::scalar {

double max_value(std::span<const double> x) {
    double m = x[0];
    for (size_t i = 1; i < x.size(); ++i) {
        if (x[i] > m) {
            m = x[i];
        }
    }
    return m;
}

size_t argmax(std::span<const double> x) {
    size_t best = 0;
    for (size_t i = 1; i < x.size(); ++i) {
        if (x[i] > x[best]) {
            best = i;
        }
    }
    return best;
}

double sum(std::span<const double> x) {
    const size_t n = x.size();
    const size_t n4 = n & ~size_t(3);
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    size_t i = 0;
    for (; i < n4; i += 4) {
        a0 += x[i + 0];
        a1 += x[i + 1];
        a2 += x[i + 2];
        a3 += x[i + 3];
    }
    double s = (a0 + a1) + (a2 + a3);
    for (; i < n; ++i) {
        s += x[i];
    }
    return s;
}

void scale(std::span<double> x, double factor) {
    for (auto & v : x) {
        v *= factor;
    }
}

} // namespace enkg::kernels::scalar
