#pragma once

#include "enkg/distributions.hpp"
#include "enkg/rng.hpp"

#include <cmath>
#include <vector>

namespace enkg::test {

// Random categorical distribution: exponentiated gaussian-ish scores so
// both flat and peaked shapes show up.
inline ProbabilityDistribution random_dist(Xoshiro256StarStar & rng, int vocab,
                                           double sharpness = 3.0) {
    ProbabilityDistribution dist;
    dist.probs.resize(vocab);
    double total = 0.0;
    for (int v = 0; v < vocab; ++v) {
        dist.probs[v] = std::exp(sharpness * (rng.next_double() - 0.5));
        total += dist.probs[v];
    }
    for (auto & p : dist.probs) {
        p /= total;
    }
    return dist;
}

inline ProbabilityDistribution uniform_dist(int vocab) {
    ProbabilityDistribution dist;
    dist.probs.assign(vocab, 1.0 / vocab);
    return dist;
}

inline ProbabilityDistribution one_hot(int vocab, int index) {
    ProbabilityDistribution dist;
    dist.probs.assign(vocab, 0.0);
    dist.probs[index] = 1.0;
    return dist;
}

} // namespace enkg::test
