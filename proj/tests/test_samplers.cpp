#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "enkg/error.hpp"
#include "enkg/samplers.hpp"
#include "helpers.hpp"

#include <cmath>
#include <set>

using namespace enkg;
using test::one_hot;
using test::random_dist;
using test::uniform_dist;

static ENkGParams paper_defaults() {
    return ENkGParams{}; // 0.25 / 0.6 / 0.65 / 0.9, k_guard 3
}

TEST_CASE("affine_from_params: paper defaults and degenerate maps") {
    const AffineMap map = affine_from_params(paper_defaults());
    CHECK(map.alpha == doctest::Approx(0.25 / 0.35).epsilon(1e-12));
    CHECK(map.beta == doctest::Approx(0.65 - (0.25 / 0.35) * 0.25).epsilon(1e-12));

    const AffineMap flat = affine_from_params({0.0, 1.0, 0.8, 0.8, 1, std::nullopt});
    CHECK(flat.alpha == 0.0);
    CHECK(flat.beta == 0.8);

    const AffineMap identity = affine_from_params({0.0, 1.0, 1e-12, 1.0, 1, std::nullopt});
    CHECK(identity.alpha == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(identity.beta == doctest::Approx(0.0).epsilon(1e-9));

    ENkGParams degenerate = paper_defaults();
    degenerate.h_high = degenerate.h_low;
    CHECK_THROWS_AS(affine_from_params(degenerate), Error);
}

TEST_CASE("map_entropy_to_p: endpoints, clipping, monotonicity") {
    const ENkGParams params = paper_defaults();
    CHECK(map_entropy_to_p(0.25, params) == 0.65);
    CHECK(map_entropy_to_p(0.6, params) == 0.9);
    CHECK(map_entropy_to_p(0.0, params) == 0.65);
    CHECK(map_entropy_to_p(1.0, params) == 0.9);
    CHECK(map_entropy_to_p(0.923220, params) == 0.9);

    double prev = 0.0;
    for (double h = 0.0; h <= 1.0; h += 0.001) {
        const double p = map_entropy_to_p(h, params);
        CHECK(p >= params.p_low);
        CHECK(p <= params.p_high);
        CHECK(p >= prev);
        prev = p;
    }
}

TEST_CASE("nucleus_cutoff: worked examples and bounds") {
    const auto sorted = sort_descending(ProbabilityDistribution{{0.4, 0.3, 0.2, 0.1}});
    CHECK(nucleus_cutoff(sorted, 0.9) == 3);
    CHECK(nucleus_cutoff(sorted, 1.0) == 4);

    const auto peaked = sort_descending(ProbabilityDistribution{{0.95, 0.05}});
    CHECK(nucleus_cutoff(peaked, 0.9) == 1);

    CHECK_THROWS_AS(nucleus_cutoff(sorted, 0.0), Error);
    CHECK_THROWS_AS(nucleus_cutoff(sorted, 1.5), Error);
}

TEST_CASE("nucleus_cutoff minimality vs exhaustive subset search") {
    // Arg-min oracle: brute force over all 2^V subsets for the
    // smallest one whose mass reaches p_target.
    Xoshiro256StarStar rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const int vocab = 4 + static_cast<int>(rng.next() % 5); // 4..8
        const auto dist = random_dist(rng, vocab);
        const double p_target = 0.05 + 0.9 * rng.next_double();
        const auto sorted = sort_descending(dist);
        const int cutoff = nucleus_cutoff(sorted, p_target);

        int best_size = vocab + 1;
        for (int mask = 1; mask < (1 << vocab); ++mask) {
            double mass = 0.0;
            for (int v = 0; v < vocab; ++v) {
                if (mask & (1 << v)) {
                    mass += dist.probs[v];
                }
            }
            if (mass >= p_target) {
                best_size = std::min(best_size, __builtin_popcount(mask));
            }
        }
        CHECK(cutoff == best_size);

        double prefix_mass = 0.0;
        for (int r = 0; r < cutoff; ++r) {
            prefix_mass += sorted.sorted_probs[r];
        }
        CHECK(prefix_mass >= p_target - 1e-12);
    }
}

TEST_CASE("apply_k_guard: guard raises, cap lowers, vocab bounds") {
    ENkGParams params = paper_defaults();
    CHECK(apply_k_guard(1, params, 4096) == 3);
    CHECK(apply_k_guard(7, params, 4096) == 7);

    params.n_max = 10;
    CHECK(apply_k_guard(50, params, 4096) == 10);

    params = paper_defaults();
    params.k_guard = 5;
    CHECK(apply_k_guard(2, params, 4) == 4);
}

TEST_CASE("truncate_renormalize: worked examples") {
    const auto sorted = sort_descending(ProbabilityDistribution{{0.4, 0.3, 0.2, 0.1}});
    const auto c3 = truncate_renormalize(sorted, 3);
    CHECK(c3.renorm_probs[0] == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
    CHECK(c3.renorm_probs[1] == doctest::Approx(3.0 / 9.0).epsilon(1e-12));
    CHECK(c3.renorm_probs[2] == doctest::Approx(2.0 / 9.0).epsilon(1e-12));

    const auto full = truncate_renormalize(sorted, 4);
    for (int r = 0; r < 4; ++r) {
        CHECK(full.renorm_probs[r] == doctest::Approx(sorted.sorted_probs[r]).epsilon(1e-12));
    }

    const auto single = truncate_renormalize(sorted, 1);
    CHECK(single.renorm_probs == std::vector<double>{1.0});

    CHECK_THROWS_AS(truncate_renormalize(sorted, 0), Error);
    CHECK_THROWS_AS(truncate_renormalize(sorted, 5), Error);
}

TEST_CASE("sample_from: boundary convention and degenerate set") {
    CandidateSet sure;
    sure.cutoff = 1;
    sure.renorm_probs = {1.0};
    sure.permutation = {7};
    for (uint64_t seed : {1ull, 2ull, 42ull}) {
        Xoshiro256StarStar rng(seed);
        CHECK(sample_from(sure, rng) == 7);
    }
}

TEST_CASE("sample_from: empirical frequencies within 3-sigma binomial bounds") {
    CandidateSet coin;
    coin.cutoff = 2;
    coin.renorm_probs = {0.5, 0.5};
    coin.permutation = {0, 1};

    const int n = 100000;
    Xoshiro256StarStar rng(4242);
    int zero = 0;
    for (int i = 0; i < n; ++i) {
        if (sample_from(coin, rng) == 0) {
            ++zero;
        }
    }
    const double freq = static_cast<double>(zero) / n;
    CHECK(freq > 0.494);
    CHECK(freq < 0.506);
}

TEST_CASE("enkg_sample: worked chain on [0.4, 0.3, 0.2, 0.1]") {
    const ProbabilityDistribution dist{{0.4, 0.3, 0.2, 0.1}};
    Xoshiro256StarStar rng(7);
    auto [token, diag] = enkg_sample(dist, paper_defaults(), rng);
    CHECK(diag.normalized_entropy == doctest::Approx(0.923220).epsilon(1e-5));
    CHECK(diag.p_target == 0.9);
    CHECK(diag.cutoff == 3);
    CHECK(!diag.guard_triggered);
    CHECK(token >= 0);
    CHECK(token <= 2);
}

TEST_CASE("enkg_sample: one-hot floor forces the guard") {
    Xoshiro256StarStar rng(7);
    auto [token, diag] = enkg_sample(one_hot(16, 5), paper_defaults(), rng);
    CHECK(diag.normalized_entropy == 0.0);
    CHECK(diag.p_target == 0.65);
    CHECK(diag.cutoff == 3);
    CHECK(diag.guard_triggered);
    (void)token;
}

TEST_CASE("enkg_sample: uniform over 1000 tokens") {
    Xoshiro256StarStar rng(7);
    auto [token, diag] = enkg_sample(uniform_dist(1000), paper_defaults(), rng);
    CHECK(diag.normalized_entropy == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(diag.p_target == 0.9);
    CHECK(diag.cutoff == 900);
    (void)token;
}

TEST_CASE("guard floor and cap ceiling over random params") {
    Xoshiro256StarStar rng(1234);
    for (int trial = 0; trial < 500; ++trial) {
        const int vocab = 2 + static_cast<int>(rng.next() % 64);
        const auto dist = random_dist(rng, vocab, 6.0);

        ENkGParams params;
        params.h_low  = 0.5 * rng.next_double();
        params.h_high = params.h_low + 0.05 + (1.0 - params.h_low - 0.05) * rng.next_double();
        params.p_low  = 0.05 + 0.6 * rng.next_double();
        params.p_high = params.p_low + (1.0 - params.p_low) * rng.next_double();
        params.k_guard = 1 + static_cast<int>(rng.next() % 12);
        if (rng.next() % 2 == 0) {
            params.n_max = params.k_guard + static_cast<int>(rng.next() % 20);
        }

        auto [candidates, diag] = enkg_candidates(dist, params);
        CHECK(candidates.cutoff >= std::min(params.k_guard, vocab));
        if (params.n_max.has_value()) {
            CHECK(candidates.cutoff <= std::min(*params.n_max, vocab));
        }
        CHECK(diag.p_target >= params.p_low);
        CHECK(diag.p_target <= params.p_high);

        // sampled token is always a member of the candidate set
        Xoshiro256StarStar draw(trial);
        const TokenId token = sample_from(candidates, draw);
        CHECK(std::find(candidates.permutation.begin(), candidates.permutation.end(), token) !=
              candidates.permutation.end());
    }
}

TEST_CASE("greedy: argmax with low-index tie-break, equals cutoff-1 pick") {
    CHECK(greedy_sample(ProbabilityDistribution{{0.1, 0.7, 0.2}}) == 1);
    CHECK(greedy_sample(ProbabilityDistribution{{0.5, 0.5}}) == 0);

    Xoshiro256StarStar rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto dist = random_dist(rng, 16);
        const auto forced = truncate_renormalize(sort_descending(dist), 1);
        CHECK(greedy_sample(dist) == forced.permutation[0]);
    }
}

TEST_CASE("top_k: degeneracies and empirical frequencies") {
    Xoshiro256StarStar rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const auto dist = random_dist(rng, 16, 6.0);
        Xoshiro256StarStar a(trial), b(trial);
        CHECK(top_k_sample(dist, 1, a) == greedy_sample(dist));
        // k = V samples the full distribution
        const auto full = truncate_renormalize(sort_descending(dist), 16);
        Xoshiro256StarStar c(trial);
        CHECK(top_k_sample(dist, 16, b) == sample_from(full, c));
    }

    const ProbabilityDistribution dist{{0.5, 0.3, 0.2}};
    const int n = 100000;
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) {
        Xoshiro256StarStar draw(substream_seed(77, 1, i));
        ++counts[top_k_sample(dist, 2, draw)];
    }
    CHECK(counts[2] == 0);
    const double sigma = 3.0 * std::sqrt(0.625 * 0.375 / n);
    CHECK(std::abs(counts[0] / double(n) - 0.625) < sigma);
    CHECK(std::abs(counts[1] / double(n) - 0.375) < sigma);
}

TEST_CASE("top_p: candidate sets and ENkG degeneracy") {
    const ProbabilityDistribution dist{{0.4, 0.3, 0.2, 0.1}};
    const auto sorted = sort_descending(dist);
    CHECK(nucleus_cutoff(sorted, 0.8) == 3);

    // ENkG with p_low = p_high = p and k_guard 1 is exactly static top-p
    Xoshiro256StarStar rng(8);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto d = random_dist(rng, 32, 5.0);
        const double p = 0.3 + 0.7 * rng.next_double();
        ENkGParams params;
        params.p_low = params.p_high = p;
        params.k_guard = 1;
        auto [candidates, diag] = enkg_candidates(d, params);
        CHECK(candidates.cutoff == nucleus_cutoff(sort_descending(d), p));

        Xoshiro256StarStar r1(trial), r2(trial);
        CHECK(enkg_sample(d, params, r1).first == top_p_sample(d, p, r2));
    }
}

TEST_CASE("top_pk: degeneracies and two-stage worked example") {
    Xoshiro256StarStar rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = random_dist(rng, 16, 5.0);
        Xoshiro256StarStar r1(trial), r2(trial), r3(trial), r4(trial);
        CHECK(top_pk_sample(d, 0.8, 16, r1) == top_p_sample(d, 0.8, r2));
        CHECK(top_pk_sample(d, 1.0, 5, r3) == top_k_sample(d, 5, r4));
    }

    // [0.4, 0.3, 0.2, 0.1], k=3, p=0.8: renormalized cumsum hits 0.8 at rank 3
    const ProbabilityDistribution dist{{0.4, 0.3, 0.2, 0.1}};
    std::set<TokenId> seen;
    for (int i = 0; i < 200; ++i) {
        Xoshiro256StarStar draw(substream_seed(3, 1, i));
        seen.insert(top_pk_sample(dist, 0.8, 3, draw));
    }
    CHECK(seen == std::set<TokenId>{0, 1, 2});
}

TEST_CASE("ENkG degeneracy to static top-k with epsilon thresholds") {
    Xoshiro256StarStar rng(10);
    for (int k : {2, 5, 10}) {
        for (int trial = 0; trial < 100; ++trial) {
            const auto d = random_dist(rng, 64, 5.0);
            ENkGParams params;
            params.p_low = params.p_high = 1e-9; // below every max-probability
            params.k_guard = k;
            auto [candidates, diag] = enkg_candidates(d, params);
            CHECK(candidates.cutoff == k);

            Xoshiro256StarStar r1(trial), r2(trial);
            CHECK(enkg_sample(d, params, r1).first == top_k_sample(d, k, r2));
        }
    }
}

TEST_CASE("p_target is monotone non-decreasing in entropy over a sampler sweep") {
    const ENkGParams params = paper_defaults();
    double prev = 0.0;
    // interpolate from one-hot toward uniform: entropy rises monotonically
    for (int step = 0; step <= 100; ++step) {
        const double w = step / 100.0;
        ProbabilityDistribution dist;
        dist.probs.assign(16, w / 16.0);
        dist.probs[0] += 1.0 - w;
        auto [candidates, diag] = enkg_candidates(dist, params);
        CHECK(diag.p_target >= prev);
        prev = diag.p_target;
    }
}

TEST_CASE("determinism: identical seeds give identical tokens and diagnostics") {
    Xoshiro256StarStar gen(12);
    for (int trial = 0; trial < 50; ++trial) {
        const auto dist = random_dist(gen, 64);
        Xoshiro256StarStar r1(trial), r2(trial);
        auto [t1, d1] = enkg_sample(dist, paper_defaults(), r1);
        auto [t2, d2] = enkg_sample(dist, paper_defaults(), r2);
        CHECK(t1 == t2);
        CHECK(d1.normalized_entropy == d2.normalized_entropy);
        CHECK(d1.p_target == d2.p_target);
        CHECK(d1.cutoff == d2.cutoff);
        CHECK(d1.guard_triggered == d2.guard_triggered);
    }
}

TEST_CASE("parameter validation rejects bad configurations") {
    ENkGParams params = paper_defaults();
    params.n_max = 2; // below k_guard 3
    CHECK_THROWS_AS(validate(params), Error);

    SamplerConfig config;
    config.kind = SamplerConfig::Kind::top_p;
    config.p = 0.0;
    CHECK_THROWS_AS(validate(config), Error);
    config.p = 1.5;
    CHECK_THROWS_AS(validate(config), Error);

    config.kind = SamplerConfig::Kind::top_k;
    config.k = 0;
    CHECK_THROWS_AS(validate(config), Error);
}
