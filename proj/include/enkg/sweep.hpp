#pragma once

#include "enkg/samplers.hpp"
#include "enkg/simulator.hpp"

#include <string>
#include <vector>

namespace enkg {

// One configuration in a hyperparameter grid.
struct SweepPoint {
    std::string   label;
    SamplerConfig config;
};

struct SweepSpec {
    std::vector<SweepPoint> grid;
    SceneSpec scene = default_scene();
    int frames = 50;
    std::vector<uint64_t> seeds;
    double threshold = 0.25;
};

void validate(const SweepSpec & spec);

// Parse a JSON sweep document:
//   {
//     "family": "top_p" | "top_k" | "top_pk" | "greedy" | "temperature" | "enkg",
//     "grid":   [ { per-point parameter overrides }, ... ],
//     "seeds":  [ 1, 2, ... ],
//     "frames": 50,
//     "threshold": 0.25,
//     "scene":  { "height", "width", "vocab", "p0", "delta", "p_max",
//                 "texture_spread" }          (optional, default scene)
//   }
SweepSpec parse_sweep_spec(const std::string & json_text);

struct SweepRow {
    std::string label;
    std::string seed; // decimal seed, or "mean" for the aggregate row
    double freeze_rate;
    double mismatch_rate;
    double mean_frame_avg_entropy;
    double mean_low_entropy_share;
};

// One row per (grid point, seed) plus a mean row per grid point, ordered
// by grid declaration then seed. jobs > 1 evaluates grid cells
// concurrently; assembly is declaration-ordered, so the CSV is
// byte-identical to a serial run.
std::vector<SweepRow> run_sweep(const SweepSpec & spec, int jobs);

std::string sweep_csv(const std::vector<SweepRow> & rows);

} // namespace enkg
