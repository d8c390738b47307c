#include "enkg/distributions.hpp"

#include "enkg/error.hpp"
#include "enkg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace enkg {

ProbabilityDistribution softmax(std::span<const double> logits, double temperature) {
    if (!(temperature > 0.0)) {
        throw Error(ErrorCode::invalid_temperature, "softmax: temperature must be > 0");
    }
    if (logits.size() < 2) {
        throw Error(ErrorCode::invalid_params, "softmax: vocabulary size must be >= 2");
    }
    for (double v : logits) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::non_finite_input, "softmax: non-finite logit");
        }
    }

    const double max_logit = kernels::max_value(logits);
    ProbabilityDistribution out;
    out.probs.resize(logits.size());
    for (size_t i = 0; i < logits.size(); ++i) {
        out.probs[i] = std::exp((logits[i] - max_logit) / temperature);
    }
    const double total = kernels::sum(out.probs);
    kernels::scale(out.probs, 1.0 / total);
    return out;
}

void validate(const ProbabilityDistribution & dist) {
    if (dist.vocab() < 2) {
        throw Error(ErrorCode::invalid_params, "distribution: vocabulary size must be >= 2");
    }
    for (double p : dist.probs) {
        if (std::isnan(p) || std::isinf(p)) {
            throw Error(ErrorCode::non_finite_probability, "distribution: non-finite probability");
        }
        if (p < 0.0) {
            throw Error(ErrorCode::negative_probability, "distribution: negative probability");
        }
    }
    const double total = kernels::sum(dist.probs);
    if (std::abs(total - 1.0) > 1e-6) {
        throw Error(ErrorCode::mass_not_normalized,
                    "distribution: mass sums to " + std::to_string(total));
    }
}

double entropy(const ProbabilityDistribution & dist) {
    validate(dist);
    double h = 0.0;
    for (double p : dist.probs) {
        if (p > 0.0) {
            h -= p * std::log(p);
        }
    }
    return h;
}

double normalized_entropy(const ProbabilityDistribution & dist) {
    const double h = entropy(dist) / std::log(static_cast<double>(dist.vocab()));
    return std::clamp(h, 0.0, 1.0);
}

SortedDistribution sort_descending(const ProbabilityDistribution & dist) {
    validate(dist);
    SortedDistribution out;
    out.permutation.resize(dist.probs.size());
    std::iota(out.permutation.begin(), out.permutation.end(), 0);
    std::stable_sort(out.permutation.begin(), out.permutation.end(),
                     [&](TokenId a, TokenId b) { return dist.probs[a] > dist.probs[b]; });
    out.sorted_probs.resize(dist.probs.size());
    for (size_t r = 0; r < out.permutation.size(); ++r) {
        out.sorted_probs[r] = dist.probs[out.permutation[r]];
    }
    return out;
}

} // namespace enkg
