#include "enkg/diagnostics.hpp"

#include "enkg/error.hpp"
#include "enkg/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace enkg {

EntropyGrid entropy_grid(std::span<const ProbabilityDistribution> dists,
                         int frame_index, int height, int width) {
    if (height < 1 || width < 1 ||
        dists.size() != static_cast<size_t>(height) * static_cast<size_t>(width)) {
        throw Error(ErrorCode::dimension_mismatch, "entropy_grid: dists length != height*width");
    }
    EntropyGrid grid;
    grid.frame_index = frame_index;
    grid.height = height;
    grid.width  = width;
    grid.values.resize(dists.size());
    for (size_t i = 0; i < dists.size(); ++i) {
        grid.values[i] = normalized_entropy(dists[i]);
    }
    return grid;
}

double frame_avg_entropy(const EntropyGrid & grid) {
    return kernels::sum(grid.values) / static_cast<double>(grid.values.size());
}

double low_entropy_share(const EntropyGrid & grid, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorCode::invalid_threshold, "low_entropy_share: threshold must be in (0, 1)");
    }
    size_t below = 0;
    for (double v : grid.values) {
        if (v < threshold) {
            ++below;
        }
    }
    return static_cast<double>(below) / static_cast<double>(grid.values.size());
}

FrameStats frame_stats(const EntropyGrid & grid,
                       std::span<const ProbabilityDistribution> dists,
                       double threshold) {
    if (dists.size() != grid.values.size()) {
        throw Error(ErrorCode::dimension_mismatch, "frame_stats: dists length != grid size");
    }
    FrameStats stats;
    stats.avg_entropy       = frame_avg_entropy(grid);
    stats.low_entropy_share = low_entropy_share(grid, threshold);
    double top1_sum = 0.0;
    for (const auto & dist : dists) {
        top1_sum += kernels::max_value(dist.probs);
    }
    stats.top1_mass_avg = top1_sum / static_cast<double>(dists.size());
    return stats;
}

CollapseReport collapse_report(std::span<const std::vector<ProbabilityDistribution>> per_frame_dists,
                               double threshold) {
    CollapseReport report;
    report.threshold = threshold;
    size_t sites = 0;
    for (size_t t = 0; t < per_frame_dists.size(); ++t) {
        const auto & frame = per_frame_dists[t];
        if (t == 0) {
            sites = frame.size();
        } else if (frame.size() != sites) {
            throw Error(ErrorCode::dimension_mismatch, "collapse_report: frames differ in site count");
        }
        // Aggregates are shape-independent; treat the frame as a 1 x m grid.
        const EntropyGrid grid = entropy_grid(frame, static_cast<int>(t), 1,
                                              static_cast<int>(frame.size()));
        const FrameStats stats = frame_stats(grid, frame, threshold);
        report.frame_avg_entropy.push_back(stats.avg_entropy);
        report.low_entropy_share.push_back(stats.low_entropy_share);
        report.top1_mass_avg.push_back(stats.top1_mass_avg);
    }
    return report;
}

static uint8_t quantize_channel(double x) {
    // round-half-up on [0, 255]
    const double scaled = std::floor(255.0 * x + 0.5);
    if (scaled <= 0.0) {
        return 0;
    }
    if (scaled >= 255.0) {
        return 255;
    }
    return static_cast<uint8_t>(scaled);
}

HeatmapImage render_heatmap(const EntropyGrid & grid, int scale) {
    if (scale < 1) {
        throw Error(ErrorCode::invalid_params, "render_heatmap: scale must be >= 1");
    }
    HeatmapImage image;
    image.width  = grid.width * scale;
    image.height = grid.height * scale;
    image.pixels.resize(static_cast<size_t>(image.width) * image.height * 3);
    for (int row = 0; row < image.height; ++row) {
        for (int col = 0; col < image.width; ++col) {
            const double h = grid.values[static_cast<size_t>(row / scale) * grid.width + col / scale];
            const size_t px = (static_cast<size_t>(row) * image.width + col) * 3;
            image.pixels[px + 0] = quantize_channel(h);
            image.pixels[px + 1] = 0;
            image.pixels[px + 2] = quantize_channel(1.0 - h);
        }
    }
    return image;
}

void write_ppm(const HeatmapImage & image, std::ostream & out) {
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char *>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) {
        throw Error(ErrorCode::sink_failure, "write_ppm: stream write failed");
    }
}

void write_collapse_csv(const CollapseReport & report, std::ostream & out) {
    out << "frame,avg_entropy,low_entropy_share,top1_mass\n";
    char line[160];
    for (size_t t = 0; t < report.frames(); ++t) {
        std::snprintf(line, sizeof(line), "%zu,%.6f,%.6f,%.6f\n", t,
                      report.frame_avg_entropy[t], report.low_entropy_share[t],
                      report.top1_mass_avg[t]);
        out << line;
    }
    if (!out) {
        throw Error(ErrorCode::sink_failure, "write_collapse_csv: stream write failed");
    }
}

} // namespace enkg
