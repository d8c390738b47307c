#include "enkg/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace enkg::kernels {

static Variant select_variant() {
    const char * forced = std::getenv("ENKG_KERNEL");
    if (forced != nullptr) {
        if (std::strcmp(forced, "scalar") == 0) {
            return Variant::scalar;
        }
        if (std::strcmp(forced, "avx2") == 0 && avx2::available()) {
            return Variant::avx2;
        }
        return Variant::scalar;
    }
    return avx2::available() ? Variant::avx2 : Variant::scalar;
}

Variant active_variant() {
    static const Variant v = select_variant();
    return v;
}

const char * variant_name(Variant v) {
    return v == Variant::avx2 ? "avx2" : "scalar";
}

double max_value(std::span<const double> x) {
    return active_variant() == Variant::avx2 ? avx2::max_value(x) : scalar::max_value(x);
}

size_t argmax(std::span<const double> x) {
    return active_variant() == Variant::avx2 ? avx2::argmax(x) : scalar::argmax(x);
}

double sum(std::span<const double> x) {
    return active_variant() == Variant::avx2 ? avx2::sum(x) : scalar::sum(x);
}

void scale(std::span<double> x, double factor) {
    if (active_variant() == Variant::avx2) {
        avx2::scale(x, factor);
    } else {
        scalar::scale(x, factor);
    }
}

} // namespace enkg::kernels
