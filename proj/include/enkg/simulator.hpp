#pragma once

#include "enkg/diagnostics.hpp"
#include "enkg/samplers.hpp"
#include "enkg/trace.hpp"

#include <cstdint>
#include <vector>

namespace enkg {

// Synthetic autoregressive world model over a token grid. Each site
// conditions on its own token history: the incumbent token's mass grows
// with its run length, s(r) = min(p0 + delta*(r-1), p_max), which is
// the minimal dynamic that reproduces entropy collapse and frame
// freezing under confident decoding.
enum class Region : uint8_t {
    structured, // remainder mass spread uniformly over all other tokens
    texture,    // remainder mass on a few near-equiprobable alternatives
};

struct SceneSpec {
    int height = 16;
    int width  = 16;
    int vocab  = 16;
    std::vector<Region> region_map; // height*width entries
    double p0    = 0.4;  // base self-transition mass
    double delta = 0.1;  // confidence growth per repeat
    double p_max = 0.95; // confidence ceiling
    int texture_spread = 4; // near-equiprobable alternatives per texture site

    int sites() const { return height * width; }
};

// Default 16x16 scene: a structured cross (center row and column, the
// "road marking" sites) over a texture background.
SceneSpec default_scene();

void validate(const SceneSpec & spec);

struct SimModel {
    SceneSpec spec;
    // Per-site candidate token cycle; texture sites draw their
    // alternatives from this list, and the teacher-forced reference
    // trajectory cycles through it.
    std::vector<std::vector<TokenId>> site_tokens;
};

struct SimState {
    std::vector<TokenId> current_frame;
    std::vector<int>     run_length;
    std::vector<int>     init_rank; // rank of the initial token in the site cycle
    int frame_index = 0;
};

struct RolloutConfig {
    int           frames = 50;
    SamplerConfig sampler;
    uint64_t      seed = 0;
    bool          teacher_forced = false;
    double        collapse_threshold = 0.25;
};

struct DriftStats {
    double freeze_rate   = 0.0; // identical consecutive frame pairs
    double mismatch_rate = 0.0; // free-running vs teacher-forced disagreement
};

struct RolloutResult {
    int frames_count = 0;
    int sites  = 0;
    int vocab  = 0;
    int height = 0;
    int width  = 0;
    std::vector<std::vector<TokenId>>           frames;      // [T][m]
    std::vector<std::vector<SampleDiagnostics>> diagnostics; // [T][m]
    std::vector<EntropyGrid>                    entropy_grids;
    CollapseReport                              collapse;
    std::vector<float>                          logits; // T*m*V, ln(prob) with a tiny floor
    DriftStats                                  drift;  // mismatch_rate filled by drift_stats()

    LogitTrace export_trace() const;
};

std::pair<SimModel, SimState> build_scene(const SceneSpec & spec, uint64_t seed);

// Predictive distribution at one site given its run length.
ProbabilityDistribution predict(const SimModel & model, const SimState & state, int site);

// Free-running: sampled tokens feed back as context. Teacher-forced:
// the state advances along the deterministic reference trajectory
// (texture sites cycle their alternatives, structured sites hold) while
// the sampler's choices are still recorded. Per-site randomness comes
// from substream_seed(config.seed, t, i) with frames numbered from 1,
// so sites are order-independent.
RolloutResult rollout(const SimModel & model, SimState state, const RolloutConfig & config);

DriftStats drift_stats(const RolloutResult & free_run, const RolloutResult & teacher_forced);

} // namespace enkg
