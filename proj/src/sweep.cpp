#include "enkg/sweep.hpp"

#include "enkg/error.hpp"

#include <json.hpp>

#include <cstdio>
#include <future>
#include <numeric>

namespace enkg {

using nlohmann::json;

void validate(const SweepSpec & spec) {
    if (spec.grid.empty()) {
        throw Error(ErrorCode::invalid_config, "sweep: grid must be non-empty");
    }
    if (spec.seeds.empty()) {
        throw Error(ErrorCode::invalid_config, "sweep: seeds must be non-empty");
    }
    if (spec.frames < 1) {
        throw Error(ErrorCode::invalid_config, "sweep: frames must be >= 1");
    }
    validate(spec.scene);
    for (const auto & point : spec.grid) {
        validate(point.config);
    }
}

static SamplerConfig config_from_json(const std::string & family, const json & point) {
    SamplerConfig config;
    if (family == "greedy") {
        config.kind = SamplerConfig::Kind::greedy;
    } else if (family == "temperature") {
        config.kind = SamplerConfig::Kind::temperature;
        config.temperature = point.value("t", 1.0);
    } else if (family == "top_k") {
        config.kind = SamplerConfig::Kind::top_k;
        config.k = point.value("k", 30);
    } else if (family == "top_p") {
        config.kind = SamplerConfig::Kind::top_p;
        config.p = point.value("p", 0.9);
    } else if (family == "top_pk") {
        config.kind = SamplerConfig::Kind::top_pk;
        config.p = point.value("p", 0.9);
        config.k = point.value("k", 30);
    } else if (family == "enkg") {
        config.kind = SamplerConfig::Kind::enkg;
        config.enkg.h_low   = point.value("h_low", config.enkg.h_low);
        config.enkg.h_high  = point.value("h_high", config.enkg.h_high);
        config.enkg.p_low   = point.value("p_low", config.enkg.p_low);
        config.enkg.p_high  = point.value("p_high", config.enkg.p_high);
        config.enkg.k_guard = point.value("k_guard", config.enkg.k_guard);
        if (point.contains("n_max")) {
            config.enkg.n_max = point["n_max"].get<int>();
        }
    } else {
        throw Error(ErrorCode::invalid_config, "sweep: unknown sampler family '" + family + "'");
    }
    return config;
}

SweepSpec parse_sweep_spec(const std::string & json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception & e) {
        throw Error(ErrorCode::invalid_config, std::string("sweep: bad JSON: ") + e.what());
    }

    SweepSpec spec;
    try {
        const std::string family = doc.at("family").get<std::string>();
        for (const auto & point : doc.at("grid")) {
            SweepPoint sp;
            sp.config = config_from_json(family, point);
            sp.label  = sp.config.label();
            spec.grid.push_back(std::move(sp));
        }
        for (const auto & seed : doc.at("seeds")) {
            spec.seeds.push_back(seed.get<uint64_t>());
        }
        spec.frames    = doc.value("frames", 50);
        spec.threshold = doc.value("threshold", 0.25);
        if (doc.contains("scene")) {
            const auto & sc = doc["scene"];
            SceneSpec scene = default_scene();
            scene.height = sc.value("height", scene.height);
            scene.width  = sc.value("width", scene.width);
            scene.vocab  = sc.value("vocab", scene.vocab);
            scene.p0     = sc.value("p0", scene.p0);
            scene.delta  = sc.value("delta", scene.delta);
            scene.p_max  = sc.value("p_max", scene.p_max);
            scene.texture_spread = sc.value("texture_spread", scene.texture_spread);
            if (scene.height != 16 || scene.width != 16) {
                // Rebuild the structured cross for the requested grid size.
                scene.region_map.assign(static_cast<size_t>(scene.height) * scene.width,
                                        Region::texture);
                for (int row = 0; row < scene.height; ++row) {
                    for (int col = 0; col < scene.width; ++col) {
                        if (row == scene.height / 2 || col == scene.width / 2) {
                            scene.region_map[static_cast<size_t>(row) * scene.width + col] =
                                Region::structured;
                        }
                    }
                }
            }
            spec.scene = scene;
        }
    } catch (const json::exception & e) {
        throw Error(ErrorCode::invalid_config, std::string("sweep: bad spec: ") + e.what());
    }
    validate(spec);
    return spec;
}

struct CellMetrics {
    double freeze_rate;
    double mismatch_rate;
    double mean_entropy;
    double mean_low_share;
};

static CellMetrics run_cell(const SweepSpec & spec, const SweepPoint & point, uint64_t seed) {
    auto [model, state] = build_scene(spec.scene, seed);

    RolloutConfig config;
    config.frames  = spec.frames;
    config.sampler = point.config;
    config.seed    = seed;
    config.collapse_threshold = spec.threshold;

    const RolloutResult free_run = rollout(model, state, config);
    config.teacher_forced = true;
    const RolloutResult forced = rollout(model, state, config);
    const DriftStats drift = drift_stats(free_run, forced);

    CellMetrics metrics;
    metrics.freeze_rate   = drift.freeze_rate;
    metrics.mismatch_rate = drift.mismatch_rate;
    metrics.mean_entropy =
        std::accumulate(free_run.collapse.frame_avg_entropy.begin(),
                        free_run.collapse.frame_avg_entropy.end(), 0.0) / spec.frames;
    metrics.mean_low_share =
        std::accumulate(free_run.collapse.low_entropy_share.begin(),
                        free_run.collapse.low_entropy_share.end(), 0.0) / spec.frames;
    return metrics;
}

std::vector<SweepRow> run_sweep(const SweepSpec & spec, int jobs) {
    validate(spec);
    if (jobs < 1) {
        throw Error(ErrorCode::invalid_config, "sweep: jobs must be >= 1");
    }

    const size_t cells = spec.grid.size() * spec.seeds.size();
    std::vector<CellMetrics> metrics(cells);

    // Slot-indexed evaluation: output position is fixed by declaration
    // order, so concurrent and serial runs assemble identical tables.
    auto cell_of = [&](size_t idx) {
        const size_t g = idx / spec.seeds.size();
        const size_t s = idx % spec.seeds.size();
        metrics[idx] = run_cell(spec, spec.grid[g], spec.seeds[s]);
    };

    if (jobs == 1) {
        for (size_t idx = 0; idx < cells; ++idx) {
            cell_of(idx);
        }
    } else {
        std::vector<std::future<void>> pending;
        for (size_t idx = 0; idx < cells; ++idx) {
            pending.push_back(std::async(std::launch::async, cell_of, idx));
            if (pending.size() == static_cast<size_t>(jobs)) {
                for (auto & f : pending) {
                    f.get();
                }
                pending.clear();
            }
        }
        for (auto & f : pending) {
            f.get();
        }
    }

    std::vector<SweepRow> rows;
    for (size_t g = 0; g < spec.grid.size(); ++g) {
        CellMetrics mean{0.0, 0.0, 0.0, 0.0};
        for (size_t s = 0; s < spec.seeds.size(); ++s) {
            const CellMetrics & m = metrics[g * spec.seeds.size() + s];
            rows.push_back({spec.grid[g].label, std::to_string(spec.seeds[s]),
                            m.freeze_rate, m.mismatch_rate, m.mean_entropy, m.mean_low_share});
            mean.freeze_rate   += m.freeze_rate;
            mean.mismatch_rate += m.mismatch_rate;
            mean.mean_entropy  += m.mean_entropy;
            mean.mean_low_share += m.mean_low_share;
        }
        const double n = static_cast<double>(spec.seeds.size());
        rows.push_back({spec.grid[g].label, "mean", mean.freeze_rate / n, mean.mismatch_rate / n,
                        mean.mean_entropy / n, mean.mean_low_share / n});
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow> & rows) {
    std::string out = "config,seed,freeze_rate,mismatch_rate,mean_frame_avg_entropy,"
                      "mean_low_entropy_share\n";
    char line[256];
    for (const auto & row : rows) {
        std::snprintf(line, sizeof(line), "%s,%s,%.6f,%.6f,%.6f,%.6f\n", row.label.c_str(),
                      row.seed.c_str(), row.freeze_rate, row.mismatch_rate,
                      row.mean_frame_avg_entropy, row.mean_low_entropy_share);
        out += line;
    }
    return out;
}

} // namespace enkg
