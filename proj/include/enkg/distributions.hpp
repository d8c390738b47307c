#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace enkg {

using TokenId = int32_t;

// Validated categorical distribution over a codebook of size V. All
// samplers consume this type. Entries are stored in double precision;
// arithmetic on them is done in double regardless of the precision of
// the logits they came from.
struct ProbabilityDistribution {
    std::vector<double> probs;

    int vocab() const { return static_cast<int>(probs.size()); }
};

// Descending view of a distribution. permutation maps rank -> original
// token id; ties in probability order by ascending token id so sorting
// is deterministic across runs and platforms.
struct SortedDistribution {
    std::vector<double>  sorted_probs;
    std::vector<TokenId> permutation;

    int vocab() const { return static_cast<int>(sorted_probs.size()); }
};

// Throws Error on non-finite logits or temperature <= 0. The max logit
// is subtracted before exponentiation, so widely spread logits do not
// overflow.
ProbabilityDistribution softmax(std::span<const double> logits, double temperature);

// Throws Error (negative_probability, non_finite_probability,
// mass_not_normalized) unless all ProbabilityDistribution invariants
// hold. Mass tolerance is 1e-6 absolute, loose enough for
// distributions deserialized from 32-bit traces.
void validate(const ProbabilityDistribution & dist);

// Shannon entropy in nats, with 0 ln 0 := 0 by explicit branch.
double entropy(const ProbabilityDistribution & dist);

// H / ln V in [0, 1]; 1 iff uniform, 0 iff one-hot. Requires V >= 2.
double normalized_entropy(const ProbabilityDistribution & dist);

SortedDistribution sort_descending(const ProbabilityDistribution & dist);

} // namespace enkg
