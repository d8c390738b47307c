#include "enkg/samplers.hpp"

#include "enkg/error.hpp"
#include "enkg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace enkg {

std::string SamplerConfig::label() const {
    char buf[128];
    switch (kind) {
        case Kind::greedy:
            return "greedy";
        case Kind::temperature:
            std::snprintf(buf, sizeof(buf), "temperature(t=%g)", temperature);
            return buf;
        case Kind::top_k:
            std::snprintf(buf, sizeof(buf), "top_k(k=%d)", k);
            return buf;
        case Kind::top_p:
            std::snprintf(buf, sizeof(buf), "top_p(p=%g)", p);
            return buf;
        case Kind::top_pk:
            std::snprintf(buf, sizeof(buf), "top_pk(p=%g;k=%d)", p, k);
            return buf;
        case Kind::enkg:
            if (enkg.n_max.has_value()) {
                std::snprintf(buf, sizeof(buf), "enkg(h=%g/%g;p=%g/%g;kg=%d;nmax=%d)",
                              enkg.h_low, enkg.h_high, enkg.p_low, enkg.p_high,
                              enkg.k_guard, *enkg.n_max);
            } else {
                std::snprintf(buf, sizeof(buf), "enkg(h=%g/%g;p=%g/%g;kg=%d)",
                              enkg.h_low, enkg.h_high, enkg.p_low, enkg.p_high, enkg.k_guard);
            }
            return buf;
    }
    return "unknown";
}

void validate(const ENkGParams & params) {
    if (!(params.h_low >= 0.0 && params.h_low < params.h_high && params.h_high <= 1.0)) {
        throw Error(ErrorCode::invalid_params, "enkg: require 0 <= h_low < h_high <= 1");
    }
    if (!(params.p_low > 0.0 && params.p_low <= params.p_high && params.p_high <= 1.0)) {
        throw Error(ErrorCode::invalid_params, "enkg: require 0 < p_low <= p_high <= 1");
    }
    if (params.k_guard < 1) {
        throw Error(ErrorCode::invalid_params, "enkg: require k_guard >= 1");
    }
    if (params.n_max.has_value() && *params.n_max < params.k_guard) {
        throw Error(ErrorCode::invalid_params, "enkg: require n_max >= k_guard");
    }
}

void validate(const SamplerConfig & config) {
    switch (config.kind) {
        case SamplerConfig::Kind::greedy:
            break;
        case SamplerConfig::Kind::temperature:
            if (!(config.temperature > 0.0)) {
                throw Error(ErrorCode::invalid_params, "sampler: temperature must be > 0");
            }
            break;
        case SamplerConfig::Kind::top_k:
            if (config.k < 1) {
                throw Error(ErrorCode::invalid_params, "sampler: k must be >= 1");
            }
            break;
        case SamplerConfig::Kind::top_p:
            if (!(config.p > 0.0 && config.p <= 1.0)) {
                throw Error(ErrorCode::invalid_params, "sampler: p must be in (0, 1]");
            }
            break;
        case SamplerConfig::Kind::top_pk:
            if (config.k < 1 || !(config.p > 0.0 && config.p <= 1.0)) {
                throw Error(ErrorCode::invalid_params, "sampler: require k >= 1 and p in (0, 1]");
            }
            break;
        case SamplerConfig::Kind::enkg:
            validate(config.enkg);
            break;
    }
}

AffineMap affine_from_params(const ENkGParams & params) {
    validate(params);
    AffineMap map;
    map.alpha = (params.p_high - params.p_low) / (params.h_high - params.h_low);
    map.beta  = params.p_low - map.alpha * params.h_low;
    return map;
}

double map_entropy_to_p(double h_norm, const ENkGParams & params) {
    // The map is monotone with clip bounds equal to its endpoint values,
    // so outside the band the result is exactly p_low / p_high; returning
    // them directly keeps the boundaries free of rounding residue.
    if (h_norm <= params.h_low) {
        return params.p_low;
    }
    if (h_norm >= params.h_high) {
        return params.p_high;
    }
    const AffineMap map = affine_from_params(params);
    return std::clamp(map.alpha * h_norm + map.beta, params.p_low, params.p_high);
}

int nucleus_cutoff(const SortedDistribution & sorted, double p_target) {
    if (!(p_target > 0.0 && p_target <= 1.0)) {
        throw Error(ErrorCode::invalid_p_target, "nucleus_cutoff: p_target must be in (0, 1]");
    }
    double cum = 0.0;
    const int v = sorted.vocab();
    // Absolute slack for accumulation rounding: a prefix whose true mass
    // equals p_target (e.g. 0.4+0.3+0.2 vs 0.9) must not be pushed one
    // token wider by a few ulps of summation error.
    const double slack = 1e-12;
    for (int j = 0; j < v; ++j) {
        cum += sorted.sorted_probs[j];
        if (cum >= p_target - slack) {
            return j + 1;
        }
    }
    return v; // accumulated mass never reached p_target
}

int apply_k_guard(int cutoff, const ENkGParams & params, int vocab) {
    int c = std::max(cutoff, std::min(params.k_guard, vocab));
    if (params.n_max.has_value()) {
        c = std::min(c, std::min(*params.n_max, vocab));
    }
    return std::clamp(c, 1, vocab);
}

CandidateSet truncate_renormalize(const SortedDistribution & sorted, int cutoff) {
    if (cutoff < 1 || cutoff > sorted.vocab()) {
        throw Error(ErrorCode::invalid_params, "truncate_renormalize: cutoff out of range");
    }
    const std::span<const double> prefix(sorted.sorted_probs.data(), static_cast<size_t>(cutoff));
    const double mass = kernels::sum(prefix);
    if (!(mass > 0.0)) {
        throw Error(ErrorCode::zero_mass_prefix, "truncate_renormalize: prefix has zero mass");
    }
    CandidateSet out;
    out.cutoff = cutoff;
    out.renorm_probs.assign(prefix.begin(), prefix.end());
    kernels::scale(out.renorm_probs, 1.0 / mass);
    out.permutation.assign(sorted.permutation.begin(), sorted.permutation.begin() + cutoff);
    return out;
}

TokenId sample_from(const CandidateSet & candidates, Xoshiro256StarStar & rng) {
    const double u = rng.next_double();
    double cum = 0.0;
    for (int r = 0; r < candidates.cutoff; ++r) {
        cum += candidates.renorm_probs[r];
        if (u < cum) {
            return candidates.permutation[r];
        }
    }
    return candidates.permutation[candidates.cutoff - 1];
}

std::pair<CandidateSet, SampleDiagnostics> enkg_candidates(const ProbabilityDistribution & dist,
                                                           const ENkGParams & params) {
    validate(params);
    SampleDiagnostics diag;
    diag.normalized_entropy = normalized_entropy(dist);
    diag.p_target           = map_entropy_to_p(diag.normalized_entropy, params);

    const SortedDistribution sorted = sort_descending(dist);
    const int nucleus = nucleus_cutoff(sorted, diag.p_target);
    const int guarded = std::max(nucleus, std::min(params.k_guard, sorted.vocab()));
    diag.guard_triggered = guarded > nucleus;
    diag.cutoff          = apply_k_guard(nucleus, params, sorted.vocab());

    return {truncate_renormalize(sorted, diag.cutoff), diag};
}

std::pair<TokenId, SampleDiagnostics> enkg_sample(const ProbabilityDistribution & dist,
                                                  const ENkGParams & params,
                                                  Xoshiro256StarStar & rng) {
    auto [candidates, diag] = enkg_candidates(dist, params);
    return {sample_from(candidates, rng), diag};
}

TokenId greedy_sample(const ProbabilityDistribution & dist) {
    validate(dist);
    return static_cast<TokenId>(kernels::argmax(dist.probs));
}

TokenId top_k_sample(const ProbabilityDistribution & dist, int k, Xoshiro256StarStar & rng) {
    if (k < 1) {
        throw Error(ErrorCode::invalid_params, "top_k: k must be >= 1");
    }
    const SortedDistribution sorted = sort_descending(dist);
    return sample_from(truncate_renormalize(sorted, std::min(k, sorted.vocab())), rng);
}

TokenId top_p_sample(const ProbabilityDistribution & dist, double p, Xoshiro256StarStar & rng) {
    const SortedDistribution sorted = sort_descending(dist);
    return sample_from(truncate_renormalize(sorted, nucleus_cutoff(sorted, p)), rng);
}

TokenId top_pk_sample(const ProbabilityDistribution & dist, double p, int k,
                      Xoshiro256StarStar & rng) {
    if (k < 1) {
        throw Error(ErrorCode::invalid_params, "top_pk: k must be >= 1");
    }
    const SortedDistribution sorted = sort_descending(dist);
    const CandidateSet topk = truncate_renormalize(sorted, std::min(k, sorted.vocab()));

    // Nucleus cutoff within the renormalized top-k set.
    SortedDistribution inner;
    inner.sorted_probs = topk.renorm_probs;
    inner.permutation  = topk.permutation;
    return sample_from(truncate_renormalize(inner, nucleus_cutoff(inner, p)), rng);
}

std::pair<TokenId, SampleDiagnostics> sample_with(const SamplerConfig & config,
                                                  const ProbabilityDistribution & dist,
                                                  Xoshiro256StarStar & rng) {
    validate(config);
    if (config.kind == SamplerConfig::Kind::enkg) {
        return enkg_sample(dist, config.enkg, rng);
    }

    SampleDiagnostics diag;
    diag.normalized_entropy = normalized_entropy(dist);
    switch (config.kind) {
        case SamplerConfig::Kind::greedy:
            diag.cutoff = 1;
            return {greedy_sample(dist), diag};
        case SamplerConfig::Kind::temperature: {
            // Equivalent to re-softmaxing ln p at the configured temperature.
            ProbabilityDistribution scaled;
            scaled.probs.resize(dist.probs.size());
            for (size_t i = 0; i < dist.probs.size(); ++i) {
                scaled.probs[i] = dist.probs[i] > 0.0
                                      ? std::pow(dist.probs[i], 1.0 / config.temperature)
                                      : 0.0;
            }
            const double total = kernels::sum(scaled.probs);
            kernels::scale(scaled.probs, 1.0 / total);
            const SortedDistribution sorted = sort_descending(scaled);
            diag.cutoff = sorted.vocab();
            return {sample_from(truncate_renormalize(sorted, sorted.vocab()), rng), diag};
        }
        case SamplerConfig::Kind::top_k:
            diag.cutoff = std::min(config.k, dist.vocab());
            return {top_k_sample(dist, config.k, rng), diag};
        case SamplerConfig::Kind::top_p: {
            const SortedDistribution sorted = sort_descending(dist);
            diag.cutoff = nucleus_cutoff(sorted, config.p);
            return {sample_from(truncate_renormalize(sorted, diag.cutoff), rng), diag};
        }
        case SamplerConfig::Kind::top_pk: {
            const SortedDistribution sorted = sort_descending(dist);
            const CandidateSet topk =
                truncate_renormalize(sorted, std::min(config.k, sorted.vocab()));
            SortedDistribution inner;
            inner.sorted_probs = topk.renorm_probs;
            inner.permutation  = topk.permutation;
            diag.cutoff = nucleus_cutoff(inner, config.p);
            return {sample_from(truncate_renormalize(inner, diag.cutoff), rng), diag};
        }
        case SamplerConfig::Kind::enkg:
            break;
    }
    throw Error(ErrorCode::invalid_config, "sample_with: unknown sampler kind");
}

} // namespace enkg
