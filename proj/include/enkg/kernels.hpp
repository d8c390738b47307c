#pragma once

#include <cstddef>
#include <span>

// Data-parallel inner loops shared by the distribution and diagnostics
// code: max/argmax reductions, strided 4-accumulator sums, and in-place
// scaling. Each kernel has a scalar reference and an AVX2 variant; the
// dispatch picks the widest available one at startup. The scalar sum
// mirrors the AVX2 lane layout (four striding accumulators combined as
// (a0+a1)+(a2+a3), then a sequential tail), so every variant is
// bit-identical on the same input — reproducibility does not depend on
// which variant the host selects.
//
// Set ENKG_KERNEL=scalar (or avx2) in the environment to force a variant.

namespace enkg::kernels {

enum class Variant {
    scalar,
    avx2,
};

Variant active_variant();
const char * variant_name(Variant v);

// Maximum element. Input must be non-empty and NaN-free.
double max_value(std::span<const double> x);

// Index of the maximum element; ties resolve to the lowest index.
size_t argmax(std::span<const double> x);

// Sum with the fixed 4-accumulator order described above.
double sum(std::span<const double> x);

// x[i] *= factor
void scale(std::span<double> x, double factor);

namespace scalar {
double max_value(std::span<const double> x);
size_t argmax(std::span<const double> x);
double sum(std::span<const double> x);
void scale(std::span<double> x, double factor);
} // namespace scalar

namespace avx2 {
bool available();
double max_value(std::span<const double> x);
size_t argmax(std::span<const double> x);
double sum(std::span<const double> x);
void scale(std::span<double> x, double factor);
} // namespace avx2

} // namespace enkg::kernels
