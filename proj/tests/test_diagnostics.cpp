#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "enkg/diagnostics.hpp"
#include "enkg/error.hpp"
#include "helpers.hpp"

#include <algorithm>
#include <sstream>

using namespace enkg;
using test::one_hot;
using test::random_dist;
using test::uniform_dist;

TEST_CASE("entropy_grid: uniform, one-hot, mixed frames") {
    std::vector<ProbabilityDistribution> frame(4, uniform_dist(8));
    auto grid = entropy_grid(frame, 0, 2, 2);
    for (double v : grid.values) {
        CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    }

    frame.assign(4, one_hot(8, 2));
    grid = entropy_grid(frame, 0, 2, 2);
    for (double v : grid.values) {
        CHECK(v == 0.0);
    }

    frame = {uniform_dist(8), uniform_dist(8), one_hot(8, 1), one_hot(8, 3)};
    grid = entropy_grid(frame, 1, 2, 2);
    CHECK(grid.values[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(grid.values[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(grid.values[2] == 0.0);
    CHECK(grid.values[3] == 0.0);

    CHECK_THROWS_AS(entropy_grid(frame, 0, 2, 3), Error);
}

TEST_CASE("frame_avg_entropy: worked values and independent summation") {
    EntropyGrid grid;
    grid.height = 2;
    grid.width = 2;
    grid.values = {1.0, 1.0, 1.0, 1.0};
    CHECK(frame_avg_entropy(grid) == 1.0);

    grid.values = {1.0, 1.0, 0.0, 0.0};
    CHECK(frame_avg_entropy(grid) == 0.5);

    Xoshiro256StarStar rng(1);
    grid.height = 4;
    grid.width = 8;
    grid.values.resize(32);
    for (auto & v : grid.values) {
        v = rng.next_double();
    }
    double naive = 0.0;
    for (double v : grid.values) {
        naive += v;
    }
    naive /= 32.0;
    CHECK(frame_avg_entropy(grid) == doctest::Approx(naive).epsilon(1e-12));
    CHECK(frame_avg_entropy(grid) >= *std::min_element(grid.values.begin(), grid.values.end()));
    CHECK(frame_avg_entropy(grid) <= *std::max_element(grid.values.begin(), grid.values.end()));
}

TEST_CASE("low_entropy_share: strict threshold and monotonicity") {
    EntropyGrid grid;
    grid.height = 1;
    grid.width = 4;

    grid.values = {0.0, 0.0, 0.0, 0.0};
    CHECK(low_entropy_share(grid, 0.25) == 1.0);

    grid.values = {1.0, 1.0, 1.0, 1.0};
    CHECK(low_entropy_share(grid, 0.25) == 0.0);

    grid.values = {0.1, 0.3, 0.2, 0.9};
    CHECK(low_entropy_share(grid, 0.25) == 0.5);

    // strictly below: a value equal to the threshold does not count
    grid.values = {0.25, 0.3, 0.2, 0.9};
    CHECK(low_entropy_share(grid, 0.25) == 0.25);

    double prev = 0.0;
    for (double threshold = 0.05; threshold < 1.0; threshold += 0.05) {
        const double share = low_entropy_share(grid, threshold);
        CHECK(share >= prev);
        prev = share;
    }

    CHECK_THROWS_AS(low_entropy_share(grid, 0.0), Error);
    CHECK_THROWS_AS(low_entropy_share(grid, 1.0), Error);
}

TEST_CASE("collapse_report: constant, trending, reversed sequences") {
    std::vector<std::vector<ProbabilityDistribution>> frames(5,
        std::vector<ProbabilityDistribution>(4, uniform_dist(8)));
    auto report = collapse_report(frames, 0.25);
    REQUIRE(report.frames() == 5);
    for (size_t t = 0; t < 5; ++t) {
        CHECK(report.frame_avg_entropy[t] == report.frame_avg_entropy[0]);
        CHECK(report.low_entropy_share[t] == 0.0);
        CHECK(report.top1_mass_avg[t] == doctest::Approx(1.0 / 8.0).epsilon(1e-12));
    }

    // frames trending toward one-hot
    frames.clear();
    for (int t = 0; t < 6; ++t) {
        const double w = t / 6.0;
        ProbabilityDistribution dist;
        dist.probs.assign(8, (1.0 - w) / 8.0);
        dist.probs[0] += w;
        frames.emplace_back(4, dist);
    }
    report = collapse_report(frames, 0.5);
    for (size_t t = 1; t < 6; ++t) {
        CHECK(report.frame_avg_entropy[t] < report.frame_avg_entropy[t - 1]);
        CHECK(report.low_entropy_share[t] >= report.low_entropy_share[t - 1]);
        CHECK(report.top1_mass_avg[t] > report.top1_mass_avg[t - 1]);
    }

    // no hidden temporal state: reversing the frames reverses the series
    auto reversed_frames = frames;
    std::reverse(reversed_frames.begin(), reversed_frames.end());
    const auto reversed = collapse_report(reversed_frames, 0.5);
    for (size_t t = 0; t < 6; ++t) {
        CHECK(reversed.frame_avg_entropy[t] == report.frame_avg_entropy[5 - t]);
        CHECK(reversed.low_entropy_share[t] == report.low_entropy_share[5 - t]);
        CHECK(reversed.top1_mass_avg[t] == report.top1_mass_avg[5 - t]);
    }
}

TEST_CASE("render_heatmap: colormap fixtures and quantization injectivity") {
    EntropyGrid grid;
    grid.height = 1;
    grid.width = 3;
    grid.values = {0.0, 0.5, 1.0};
    const auto image = render_heatmap(grid, 1);
    REQUIRE(image.pixels.size() == 9);
    CHECK(image.pixels[0] == 0);
    CHECK(image.pixels[1] == 0);
    CHECK(image.pixels[2] == 255);
    CHECK(image.pixels[3] == 128);
    CHECK(image.pixels[4] == 0);
    CHECK(image.pixels[5] == 128);
    CHECK(image.pixels[6] == 255);
    CHECK(image.pixels[7] == 0);
    CHECK(image.pixels[8] == 0);

    // values more than one quantization step apart map to different pixels
    Xoshiro256StarStar rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const double h1 = rng.next_double();
        const double h2 = rng.next_double();
        if (std::abs(h1 - h2) <= 1.0 / 255.0) {
            continue;
        }
        EntropyGrid pair;
        pair.height = 1;
        pair.width = 2;
        pair.values = {h1, h2};
        const auto img = render_heatmap(pair, 1);
        const bool differ = img.pixels[0] != img.pixels[3] || img.pixels[2] != img.pixels[5];
        CHECK(differ);
    }
}

TEST_CASE("render_heatmap: scale replicates pixels") {
    EntropyGrid grid;
    grid.height = 2;
    grid.width = 2;
    grid.values = {0.0, 1.0, 0.25, 0.75};
    const auto image = render_heatmap(grid, 3);
    CHECK(image.width == 6);
    CHECK(image.height == 6);
    const auto unit = render_heatmap(grid, 1);
    for (int row = 0; row < 6; ++row) {
        for (int col = 0; col < 6; ++col) {
            for (int ch = 0; ch < 3; ++ch) {
                CHECK(image.pixels[(row * 6 + col) * 3 + ch] ==
                      unit.pixels[((row / 3) * 2 + col / 3) * 3 + ch]);
            }
        }
    }
}

TEST_CASE("PPM serialization: exact header and payload") {
    EntropyGrid grid;
    grid.height = 1;
    grid.width = 2;
    grid.values = {0.0, 1.0};
    std::ostringstream out;
    write_ppm(render_heatmap(grid, 1), out);
    const std::string bytes = out.str();
    const std::string header = "P6\n2 1\n255\n";
    REQUIRE(bytes.size() == header.size() + 6);
    CHECK(bytes.substr(0, header.size()) == header);
    CHECK(static_cast<uint8_t>(bytes[header.size() + 0]) == 0);
    CHECK(static_cast<uint8_t>(bytes[header.size() + 2]) == 255);
    CHECK(static_cast<uint8_t>(bytes[header.size() + 3]) == 255);
    CHECK(static_cast<uint8_t>(bytes[header.size() + 5]) == 0);
}

TEST_CASE("collapse CSV: header and 6-digit formatting") {
    CollapseReport report;
    report.threshold = 0.25;
    report.frame_avg_entropy = {1.0, 0.5};
    report.low_entropy_share = {0.0, 0.125};
    report.top1_mass_avg = {0.2, 0.333333333};
    std::ostringstream out;
    write_collapse_csv(report, out);
    CHECK(out.str() ==
          "frame,avg_entropy,low_entropy_share,top1_mass\n"
          "0,1.000000,0.000000,0.200000\n"
          "1,0.500000,0.125000,0.333333\n");
}
