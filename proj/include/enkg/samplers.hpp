#pragma once

#include "enkg/distributions.hpp"
#include "enkg/rng.hpp"

#include <optional>
#include <string>
#include <utility>

namespace enkg {

// Hyperparameters of the entropy-guided sampler: the entropy band
// [h_low, h_high] maps onto the nucleus band [p_low, p_high], k_guard
// floors the candidate count, and n_max (optional) caps it.
struct ENkGParams {
    double h_low  = 0.25;
    double h_high = 0.60;
    double p_low  = 0.65;
    double p_high = 0.90;
    int    k_guard = 3;
    std::optional<int> n_max;
};

// Slope/intercept of the entropy -> nucleus-probability map.
struct AffineMap {
    double alpha = 0.0;
    double beta  = 0.0;
};

// Sorted token prefix of length cutoff with renormalized probabilities.
struct CandidateSet {
    int                  cutoff = 0;
    std::vector<double>  renorm_probs;
    std::vector<TokenId> permutation;
};

struct SampleDiagnostics {
    double normalized_entropy = 0.0;
    double p_target           = 0.0;
    int    cutoff             = 0;
    bool   guard_triggered    = false;
};

struct SamplerConfig {
    enum class Kind {
        greedy,
        temperature,
        top_k,
        top_p,
        top_pk,
        enkg,
    };

    Kind       kind = Kind::enkg;
    double     temperature = 1.0; // temperature variant only
    int        k = 30;            // top_k / top_pk
    double     p = 0.9;           // top_p / top_pk
    ENkGParams enkg;

    std::string label() const;
};

void validate(const ENkGParams & params);
void validate(const SamplerConfig & config);

// alpha = (p_high - p_low) / (h_high - h_low), beta = p_low - alpha * h_low.
AffineMap affine_from_params(const ENkGParams & params);

// clip(alpha * h_norm + beta, p_low, p_high); monotone non-decreasing in h_norm.
double map_entropy_to_p(double h_norm, const ENkGParams & params);

// Smallest prefix length whose cumulative mass reaches p_target; V if the
// accumulated floating-point mass never gets there.
int nucleus_cutoff(const SortedDistribution & sorted, double p_target);

// Guard raises the prefix to min(k_guard, V); the optional n_max cap
// lowers it afterwards (validation guarantees n_max >= k_guard).
int apply_k_guard(int cutoff, const ENkGParams & params, int vocab);

CandidateSet truncate_renormalize(const SortedDistribution & sorted, int cutoff);

// One uniform draw, inverse-CDF over half-open buckets [lo, hi).
TokenId sample_from(const CandidateSet & candidates, Xoshiro256StarStar & rng);

std::pair<TokenId, SampleDiagnostics> enkg_sample(const ProbabilityDistribution & dist,
                                                  const ENkGParams & params,
                                                  Xoshiro256StarStar & rng);

// Candidate set the entropy-guided sampler would draw from, without
// consuming randomness. Shared by enkg_sample and the property suites.
std::pair<CandidateSet, SampleDiagnostics> enkg_candidates(const ProbabilityDistribution & dist,
                                                           const ENkGParams & params);

TokenId greedy_sample(const ProbabilityDistribution & dist);
TokenId top_k_sample(const ProbabilityDistribution & dist, int k, Xoshiro256StarStar & rng);
TokenId top_p_sample(const ProbabilityDistribution & dist, double p, Xoshiro256StarStar & rng);
TokenId top_pk_sample(const ProbabilityDistribution & dist, double p, int k, Xoshiro256StarStar & rng);

// Dispatch on config.kind. Diagnostics always carry the normalized
// entropy and final cutoff; p_target/guard_triggered are meaningful for
// the enkg variant only.
std::pair<TokenId, SampleDiagnostics> sample_with(const SamplerConfig & config,
                                                  const ProbabilityDistribution & dist,
                                                  Xoshiro256StarStar & rng);

} // namespace enkg
