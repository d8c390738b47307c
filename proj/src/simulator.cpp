#include "enkg/simulator.hpp"

#include "enkg/error.hpp"
#include "enkg/rng.hpp"

#include <algorithm>
#include <cmath>

namespace enkg {

SceneSpec default_scene() {
    SceneSpec spec;
    spec.region_map.resize(static_cast<size_t>(spec.height) * spec.width, Region::texture);
    for (int row = 0; row < spec.height; ++row) {
        for (int col = 0; col < spec.width; ++col) {
            if (row == spec.height / 2 || col == spec.width / 2) {
                spec.region_map[static_cast<size_t>(row) * spec.width + col] = Region::structured;
            }
        }
    }
    return spec;
}

void validate(const SceneSpec & spec) {
    if (spec.height < 1 || spec.width < 1) {
        throw Error(ErrorCode::invalid_spec, "scene: grid dimensions must be positive");
    }
    if (spec.vocab < 2) {
        throw Error(ErrorCode::invalid_spec, "scene: vocab must be >= 2");
    }
    if (!(spec.p0 > 0.0 && spec.p0 < spec.p_max && spec.p_max < 1.0)) {
        throw Error(ErrorCode::invalid_spec, "scene: require 0 < p0 < p_max < 1");
    }
    if (spec.delta < 0.0) {
        throw Error(ErrorCode::invalid_spec, "scene: delta must be >= 0");
    }
    if (spec.texture_spread < 1 || spec.texture_spread >= spec.vocab) {
        throw Error(ErrorCode::invalid_spec, "scene: require 1 <= texture_spread < vocab");
    }
    if (spec.region_map.size() != static_cast<size_t>(spec.sites())) {
        throw Error(ErrorCode::invalid_spec, "scene: region_map length != height*width");
    }
    if (spec.texture_spread < 2 &&
        std::find(spec.region_map.begin(), spec.region_map.end(), Region::texture) !=
            spec.region_map.end()) {
        throw Error(ErrorCode::invalid_spec,
                    "scene: texture sites need texture_spread >= 2 for a valid remainder split");
    }
}

std::pair<SimModel, SimState> build_scene(const SceneSpec & spec, uint64_t seed) {
    validate(spec);
    SimModel model;
    model.spec = spec;
    model.site_tokens.resize(spec.sites());

    SimState state;
    state.current_frame.resize(spec.sites());
    state.run_length.assign(spec.sites(), 1);
    state.init_rank.assign(spec.sites(), 0);
    state.frame_index = 0;

    for (int i = 0; i < spec.sites(); ++i) {
        auto & cycle = model.site_tokens[i];
        if (spec.region_map[i] == Region::structured) {
            // Fixed region token; the reference trajectory holds it.
            cycle = {0};
            state.current_frame[i] = 0;
        } else {
            cycle.resize(spec.texture_spread);
            const int base = i % spec.vocab;
            for (int j = 0; j < spec.texture_spread; ++j) {
                cycle[j] = static_cast<TokenId>((base + j) % spec.vocab);
            }
            Xoshiro256StarStar rng(substream_seed(seed, 0, static_cast<uint64_t>(i)));
            const int rank = static_cast<int>(rng.next() % static_cast<uint64_t>(spec.texture_spread));
            state.init_rank[i]      = rank;
            state.current_frame[i]  = cycle[rank];
        }
    }
    return {std::move(model), std::move(state)};
}

ProbabilityDistribution predict(const SimModel & model, const SimState & state, int site) {
    const SceneSpec & spec = model.spec;
    if (site < 0 || site >= spec.sites()) {
        throw Error(ErrorCode::dimension_mismatch, "predict: site out of range");
    }
    if (state.current_frame.empty() || state.run_length[site] < 1) {
        throw Error(ErrorCode::uninitialized_state, "predict: state not initialized");
    }

    const int     r = state.run_length[site];
    const double  s = std::min(spec.p0 + spec.delta * (r - 1), spec.p_max);
    const TokenId incumbent = state.current_frame[site];

    ProbabilityDistribution dist;
    dist.probs.assign(spec.vocab, 0.0);
    dist.probs[incumbent] = s;

    if (spec.region_map[site] == Region::structured) {
        const double rest = (1.0 - s) / (spec.vocab - 1);
        for (int v = 0; v < spec.vocab; ++v) {
            if (v != incumbent) {
                dist.probs[v] = rest;
            }
        }
    } else {
        // Geometric profile (ratio 2/3) over the designated alternatives,
        // renormalized to the remaining mass.
        const auto & cycle = model.site_tokens[site];
        std::vector<TokenId> alts;
        for (TokenId tok : cycle) {
            if (tok != incumbent) {
                alts.push_back(tok);
            }
        }
        alts.resize(spec.texture_spread - 1);
        double weight = 1.0;
        double total  = 0.0;
        std::vector<double> weights(alts.size());
        for (size_t j = 0; j < alts.size(); ++j) {
            weights[j] = weight;
            total += weight;
            weight *= 2.0 / 3.0;
        }
        for (size_t j = 0; j < alts.size(); ++j) {
            dist.probs[alts[j]] = (1.0 - s) * weights[j] / total;
        }
    }
    return dist;
}

// Reference trajectory for teacher forcing: texture sites cycle their
// alternatives one step per frame, structured sites hold.
static TokenId reference_token(const SimModel & model, const SimState & init, int site, int frame) {
    const auto & cycle = model.site_tokens[site];
    if (model.spec.region_map[site] == Region::structured) {
        return cycle[0];
    }
    return cycle[(init.init_rank[site] + frame) % static_cast<int>(cycle.size())];
}

RolloutResult rollout(const SimModel & model, SimState state, const RolloutConfig & config) {
    validate(model.spec);
    validate(config.sampler);
    if (config.frames < 1) {
        throw Error(ErrorCode::invalid_config, "rollout: frames must be >= 1");
    }

    const SceneSpec & spec = model.spec;
    const int m = spec.sites();
    const SimState init = state;

    RolloutResult result;
    result.frames_count = config.frames;
    result.sites  = m;
    result.vocab  = spec.vocab;
    result.height = spec.height;
    result.width  = spec.width;
    result.collapse.threshold = config.collapse_threshold;
    result.logits.reserve(static_cast<size_t>(config.frames) * m * spec.vocab);

    std::vector<ProbabilityDistribution> frame_dists(m);
    for (int t = 1; t <= config.frames; ++t) {
        // All sites condition on the previous frame's state.
        for (int i = 0; i < m; ++i) {
            frame_dists[i] = predict(model, state, i);
            for (double p : frame_dists[i].probs) {
                result.logits.push_back(static_cast<float>(std::log(std::max(p, 1e-35))));
            }
        }

        std::vector<TokenId>           tokens(m);
        std::vector<SampleDiagnostics> diags(m);
        for (int i = 0; i < m; ++i) {
            Xoshiro256StarStar rng(substream_seed(config.seed, static_cast<uint64_t>(t),
                                                  static_cast<uint64_t>(i)));
            auto [token, diag] = sample_with(config.sampler, frame_dists[i], rng);
            tokens[i] = token;
            diags[i]  = diag;
        }

        EntropyGrid grid = entropy_grid(frame_dists, t - 1, spec.height, spec.width);
        const FrameStats stats = frame_stats(grid, frame_dists, config.collapse_threshold);
        result.collapse.frame_avg_entropy.push_back(stats.avg_entropy);
        result.collapse.low_entropy_share.push_back(stats.low_entropy_share);
        result.collapse.top1_mass_avg.push_back(stats.top1_mass_avg);
        result.entropy_grids.push_back(std::move(grid));

        // Advance the state: self-generated context when free-running,
        // the reference trajectory when teacher-forced.
        for (int i = 0; i < m; ++i) {
            const TokenId next = config.teacher_forced
                                     ? reference_token(model, init, i, t)
                                     : tokens[i];
            if (next == state.current_frame[i]) {
                ++state.run_length[i];
            } else {
                state.run_length[i]    = 1;
                state.current_frame[i] = next;
            }
        }
        state.frame_index = t;

        result.frames.push_back(std::move(tokens));
        result.diagnostics.push_back(std::move(diags));
    }

    // freeze rate over consecutive recorded frames
    if (config.frames >= 2) {
        int frozen = 0;
        for (int t = 0; t + 1 < config.frames; ++t) {
            if (result.frames[t] == result.frames[t + 1]) {
                ++frozen;
            }
        }
        result.drift.freeze_rate = static_cast<double>(frozen) / (config.frames - 1);
    }
    return result;
}

DriftStats drift_stats(const RolloutResult & free_run, const RolloutResult & teacher_forced) {
    if (free_run.frames_count != teacher_forced.frames_count ||
        free_run.sites != teacher_forced.sites) {
        throw Error(ErrorCode::dimension_mismatch, "drift_stats: rollouts differ in shape");
    }
    DriftStats stats;
    stats.freeze_rate = free_run.drift.freeze_rate;
    size_t mismatches = 0;
    for (int t = 0; t < free_run.frames_count; ++t) {
        for (int i = 0; i < free_run.sites; ++i) {
            if (free_run.frames[t][i] != teacher_forced.frames[t][i]) {
                ++mismatches;
            }
        }
    }
    stats.mismatch_rate = static_cast<double>(mismatches) /
                          (static_cast<double>(free_run.frames_count) * free_run.sites);
    return stats;
}

LogitTrace RolloutResult::export_trace() const {
    LogitTrace trace;
    trace.header.vocab  = static_cast<uint32_t>(vocab);
    trace.header.frames = static_cast<uint32_t>(frames_count);
    trace.header.sites  = static_cast<uint32_t>(sites);
    trace.payload       = logits;
    return trace;
}

} // namespace enkg
