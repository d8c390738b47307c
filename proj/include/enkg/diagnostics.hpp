#pragma once

#include "enkg/distributions.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace enkg {

// Per-site normalized entropies of one frame, row-major.
struct EntropyGrid {
    int frame_index = 0;
    int height = 0;
    int width  = 0;
    std::vector<double> values;

    int sites() const { return height * width; }
};

// Per-frame aggregation of entropy structure over a rollout.
struct CollapseReport {
    std::vector<double> frame_avg_entropy;
    std::vector<double> low_entropy_share;
    std::vector<double> top1_mass_avg;
    double threshold = 0.25;

    size_t frames() const { return frame_avg_entropy.size(); }
};

struct HeatmapImage {
    int width  = 0;
    int height = 0;
    std::vector<uint8_t> pixels; // RGB triples, row-major, top row first
};

EntropyGrid entropy_grid(std::span<const ProbabilityDistribution> dists,
                         int frame_index, int height, int width);

double frame_avg_entropy(const EntropyGrid & grid);

// Fraction of sites with normalized entropy strictly below threshold.
double low_entropy_share(const EntropyGrid & grid, double threshold);

// One-frame slice of a CollapseReport; the grid supplies the entropies
// so they are not recomputed from the distributions.
struct FrameStats {
    double avg_entropy       = 0.0;
    double low_entropy_share = 0.0;
    double top1_mass_avg     = 0.0;
};
FrameStats frame_stats(const EntropyGrid & grid,
                       std::span<const ProbabilityDistribution> dists,
                       double threshold);

CollapseReport collapse_report(std::span<const std::vector<ProbabilityDistribution>> per_frame_dists,
                               double threshold);

// Linear blue (H=0) -> red (H=1) colormap, round-half-up channel
// quantization; scale replicates each site into a scale x scale block.
HeatmapImage render_heatmap(const EntropyGrid & grid, int scale);

// Binary PPM: "P6\n<width> <height>\n255\n" + raw RGB bytes.
void write_ppm(const HeatmapImage & image, std::ostream & out);

// CSV with header "frame,avg_entropy,low_entropy_share,top1_mass",
// six fractional digits.
void write_collapse_csv(const CollapseReport & report, std::ostream & out);

} // namespace enkg
