// enkg — entropy-guided decoding toolkit CLI.
//
// Subcommands: sample | rollout | sweep | heatmap | replay
// Exit codes: 0 ok, 2 config error, 3 I/O error, 4 numeric validation error.

#include "enkg/diagnostics.hpp"
#include "enkg/error.hpp"
#include "enkg/kernels.hpp"
#include "enkg/samplers.hpp"
#include "enkg/simulator.hpp"
#include "enkg/sweep.hpp"
#include "enkg/trace.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace enkg;

static constexpr const char * tool_version = "enkg 1.0.0";

namespace {

struct StrategyFlags {
    std::string strategy = "enkg";
    std::string preset;
    double temperature = 1.0;
    int    k = 30;
    double p = 0.9;
    double h_low = 0.25, h_high = 0.6, p_low = 0.65, p_high = 0.9;
    int    k_guard = 3;
    int    n_max = 0; // 0 = disabled

    // option handles, so config-file values only fill flags the user left unset
    CLI::Option *o_strategy = nullptr, *o_preset = nullptr, *o_temp = nullptr, *o_k = nullptr,
                *o_p = nullptr, *o_h_low = nullptr, *o_h_high = nullptr, *o_p_low = nullptr,
                *o_p_high = nullptr, *o_k_guard = nullptr, *o_n_max = nullptr;

    void attach(CLI::App * cmd) {
        o_strategy = cmd->add_option("--strategy", strategy,
                                     "greedy|temperature|topk|topp|toppk|enkg (default enkg)");
        o_preset   = cmd->add_option("--preset", preset,
                                     "drivingworld (top-k 30) | cosmos (top-p 0.8) | greedy");
        o_temp  = cmd->add_option("--temp", temperature, "temperature for the temperature strategy");
        o_k     = cmd->add_option("--k", k, "k for topk/toppk");
        o_p     = cmd->add_option("--p", p, "p for topp/toppk");
        o_h_low  = cmd->add_option("--h-low", h_low, "ENkG entropy floor");
        o_h_high = cmd->add_option("--h-high", h_high, "ENkG entropy ceiling");
        o_p_low  = cmd->add_option("--p-low", p_low, "ENkG nucleus floor");
        o_p_high = cmd->add_option("--p-high", p_high, "ENkG nucleus ceiling");
        o_k_guard = cmd->add_option("--k-guard", k_guard, "ENkG guard size");
        o_n_max   = cmd->add_option("--n-max", n_max, "ENkG candidate cap (0 disables)");
    }

    // File values fill in only where no command-line flag was given.
    void apply_config(const json & cfg) {
        auto fill = [&](const char * key, CLI::Option * opt, auto & slot) {
            if (cfg.contains(key) && opt->count() == 0) {
                cfg.at(key).get_to(slot);
            }
        };
        fill("strategy", o_strategy, strategy);
        fill("preset", o_preset, preset);
        fill("temp", o_temp, temperature);
        fill("k", o_k, k);
        fill("p", o_p, p);
        fill("h_low", o_h_low, h_low);
        fill("h_high", o_h_high, h_high);
        fill("p_low", o_p_low, p_low);
        fill("p_high", o_p_high, p_high);
        fill("k_guard", o_k_guard, k_guard);
        fill("n_max", o_n_max, n_max);
    }

    SamplerConfig resolve() const {
        SamplerConfig config;
        std::string name = strategy;
        if (!preset.empty()) {
            if (preset == "drivingworld") {
                config.kind = SamplerConfig::Kind::top_k;
                config.k = 30;
                return config;
            }
            if (preset == "cosmos") {
                config.kind = SamplerConfig::Kind::top_p;
                config.p = 0.8;
                return config;
            }
            if (preset == "greedy") {
                config.kind = SamplerConfig::Kind::greedy;
                return config;
            }
            throw Error(ErrorCode::invalid_config, "unknown preset '" + preset + "'");
        }
        if (name == "greedy") {
            config.kind = SamplerConfig::Kind::greedy;
        } else if (name == "temperature") {
            config.kind = SamplerConfig::Kind::temperature;
            config.temperature = temperature;
        } else if (name == "topk") {
            config.kind = SamplerConfig::Kind::top_k;
            config.k = k;
        } else if (name == "topp") {
            config.kind = SamplerConfig::Kind::top_p;
            config.p = p;
        } else if (name == "toppk") {
            config.kind = SamplerConfig::Kind::top_pk;
            config.p = p;
            config.k = k;
        } else if (name == "enkg") {
            config.kind = SamplerConfig::Kind::enkg;
            config.enkg = {h_low, h_high, p_low, p_high, k_guard,
                           n_max > 0 ? std::optional<int>(n_max) : std::nullopt};
        } else {
            throw Error(ErrorCode::invalid_config, "unknown strategy '" + name + "'");
        }
        validate(config);
        return config;
    }

    json to_json() const {
        json j;
        j["strategy"] = strategy;
        if (!preset.empty()) {
            j["preset"] = preset;
        }
        j["temp"] = temperature;
        j["k"] = k;
        j["p"] = p;
        j["h_low"] = h_low;
        j["h_high"] = h_high;
        j["p_low"] = p_low;
        j["p_high"] = p_high;
        j["k_guard"] = k_guard;
        j["n_max"] = n_max;
        return j;
    }
};

std::vector<double> parse_probs(const std::string & csv) {
    std::vector<double> probs;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            probs.push_back(std::stod(item));
        } catch (const std::exception &) {
            throw Error(ErrorCode::invalid_config, "--probs: cannot parse '" + item + "'");
        }
    }
    if (probs.size() < 2) {
        throw Error(ErrorCode::invalid_config, "--probs: need at least two values");
    }
    return probs;
}

void write_text_file(const fs::path & path, const std::string & text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::sink_failure, "cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw Error(ErrorCode::sink_failure, "write failed: " + path.string());
    }
}

void write_manifest(const fs::path & out_dir, const std::string & command, const json & config,
                    const std::vector<uint64_t> & seeds, const std::vector<std::string> & outputs) {
    json manifest;
    manifest["tool_version"] = tool_version;
    manifest["kernel_variant"] = kernels::variant_name(kernels::active_variant());
    manifest["command"] = command;
    manifest["config"] = config;
    manifest["seeds"] = seeds;
    manifest["outputs"] = outputs;
    write_text_file(out_dir / "run_manifest.json", manifest.dump(2) + "\n");
}

int cmd_sample(const StrategyFlags & flags, const std::string & probs_csv, int uniform_v,
               const std::string & trace_path, int frame, int site, double temperature,
               uint64_t seed) {
    const SamplerConfig config = flags.resolve();

    ProbabilityDistribution dist;
    if (!probs_csv.empty()) {
        dist.probs = parse_probs(probs_csv);
    } else if (uniform_v > 0) {
        if (uniform_v < 2) {
            throw Error(ErrorCode::invalid_config, "--uniform: vocabulary must be >= 2");
        }
        dist.probs.assign(uniform_v, 1.0 / uniform_v);
    } else if (!trace_path.empty()) {
        const LogitTrace trace = read_trace_file(trace_path);
        if (frame < 0 || static_cast<uint32_t>(frame) >= trace.header.frames ||
            site < 0 || static_cast<uint32_t>(site) >= trace.header.sites) {
            throw Error(ErrorCode::invalid_config, "--frame/--site out of trace bounds");
        }
        const float * cell = trace.cell(frame, site);
        std::vector<double> logits(cell, cell + trace.header.vocab);
        dist = softmax(logits, temperature);
    } else {
        throw Error(ErrorCode::invalid_config,
                    "sample: need a distribution source (--probs, --uniform, or --trace)");
    }
    validate(dist);

    Xoshiro256StarStar rng(substream_seed(seed, 1, 0));
    auto [token, diag] = sample_with(config, dist, rng);

    json out;
    out["token"] = token;
    out["h_norm"] = diag.normalized_entropy;
    out["p_target"] = diag.p_target;
    out["cutoff"] = diag.cutoff;
    out["guard_triggered"] = diag.guard_triggered;
    std::cout << out.dump() << "\n";
    return 0;
}

SceneSpec scene_from_flags(int height, int width, int vocab, double p0, double delta,
                           double p_max, int spread) {
    SceneSpec scene = default_scene();
    if (height != scene.height || width != scene.width) {
        scene.height = height;
        scene.width  = width;
        scene.region_map.assign(static_cast<size_t>(height) * width, Region::texture);
        for (int row = 0; row < height; ++row) {
            for (int col = 0; col < width; ++col) {
                if (row == height / 2 || col == width / 2) {
                    scene.region_map[static_cast<size_t>(row) * width + col] = Region::structured;
                }
            }
        }
    }
    scene.vocab = vocab;
    scene.p0    = p0;
    scene.delta = delta;
    scene.p_max = p_max;
    scene.texture_spread = spread;
    validate(scene);
    return scene;
}

int cmd_rollout(const StrategyFlags & flags, const SceneSpec & scene, int frames, uint64_t seed,
                const fs::path & out_dir, double threshold, int heatmap_scale) {
    const SamplerConfig sampler = flags.resolve();
    fs::create_directories(out_dir);

    auto [model, state] = build_scene(scene, seed);
    RolloutConfig config;
    config.frames  = frames;
    config.sampler = sampler;
    config.seed    = seed;
    config.collapse_threshold = threshold;

    const RolloutResult free_run = rollout(model, state, config);
    config.teacher_forced = true;
    const RolloutResult forced = rollout(model, state, config);
    const DriftStats drift = drift_stats(free_run, forced);

    std::vector<std::string> outputs;

    const fs::path trace_path = out_dir / "trace.lgtr";
    write_trace_file(free_run.export_trace(), trace_path.string());
    outputs.push_back("trace.lgtr");

    const fs::path csv_path = out_dir / "collapse.csv";
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) {
            throw Error(ErrorCode::sink_failure, "cannot open " + csv_path.string());
        }
        write_collapse_csv(free_run.collapse, out);
    }
    outputs.push_back("collapse.csv");

    for (int t = 0; t < frames; ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04d.ppm", t);
        const fs::path ppm_path = out_dir / name;
        std::ofstream out(ppm_path, std::ios::binary);
        if (!out) {
            throw Error(ErrorCode::sink_failure, "cannot open " + ppm_path.string());
        }
        write_ppm(render_heatmap(free_run.entropy_grids[t], heatmap_scale), out);
        outputs.push_back(name);
    }

    json summary;
    summary["strategy"] = sampler.label();
    summary["frames"] = frames;
    summary["seed"] = seed;
    summary["freeze_rate"] = drift.freeze_rate;
    summary["mismatch_rate"] = drift.mismatch_rate;
    summary["final_frame_avg_entropy"] = free_run.collapse.frame_avg_entropy.back();
    const fs::path summary_path = out_dir / "summary.json";
    write_text_file(summary_path, summary.dump(2) + "\n");
    outputs.push_back("summary.json");

    json cfg = flags.to_json();
    cfg["frames"] = frames;
    cfg["threshold"] = threshold;
    cfg["scene"] = {{"height", scene.height}, {"width", scene.width}, {"vocab", scene.vocab},
                    {"p0", scene.p0},         {"delta", scene.delta}, {"p_max", scene.p_max},
                    {"texture_spread", scene.texture_spread}};
    write_manifest(out_dir, "rollout", cfg, {seed}, outputs);

    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_sweep(const std::string & spec_path, const std::string & out_path, int jobs) {
    std::ifstream in(spec_path);
    if (!in) {
        throw Error(ErrorCode::source_failure, "cannot open sweep spec " + spec_path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();

    const SweepSpec spec = parse_sweep_spec(buffer.str());
    const std::string csv = sweep_csv(run_sweep(spec, jobs));

    if (out_path.empty() || out_path == "-") {
        std::cout << csv;
    } else {
        const fs::path out_file(out_path);
        if (out_file.has_parent_path()) {
            fs::create_directories(out_file.parent_path());
        }
        write_text_file(out_file, csv);
        json cfg;
        cfg["spec_path"] = spec_path;
        cfg["jobs"] = jobs;
        write_manifest(out_file.has_parent_path() ? out_file.parent_path() : fs::path("."),
                       "sweep", cfg, spec.seeds, {out_path});
    }
    return 0;
}

int cmd_heatmap(const std::string & trace_path, int frame, const std::string & out_path,
                double temperature, int scale, int height, int width) {
    const LogitTrace trace = read_trace_file(trace_path);
    if (frame < 0 || static_cast<uint32_t>(frame) >= trace.header.frames) {
        throw Error(ErrorCode::invalid_config, "--frame out of trace bounds");
    }

    int h = height, w = width;
    if (h <= 0 || w <= 0) {
        // Square grid when the caller does not provide dimensions.
        const int sites = static_cast<int>(trace.header.sites);
        int side = 1;
        while (side * side < sites) {
            ++side;
        }
        if (side * side == sites) {
            h = side;
            w = side;
        } else {
            h = 1;
            w = sites;
        }
    }
    if (static_cast<uint32_t>(h) * static_cast<uint32_t>(w) != trace.header.sites) {
        throw Error(ErrorCode::invalid_config, "--height/--width do not match trace sites");
    }

    std::vector<ProbabilityDistribution> dists(trace.header.sites);
    std::vector<double> logits(trace.header.vocab);
    for (uint32_t i = 0; i < trace.header.sites; ++i) {
        const float * cell = trace.cell(frame, i);
        for (uint32_t v = 0; v < trace.header.vocab; ++v) {
            logits[v] = cell[v];
        }
        dists[i] = softmax(logits, temperature);
    }
    const EntropyGrid grid = entropy_grid(dists, frame, h, w);

    const fs::path out_file(out_path);
    if (out_file.has_parent_path()) {
        fs::create_directories(out_file.parent_path());
    }
    std::ofstream out(out_file, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::sink_failure, "cannot open " + out_path);
    }
    write_ppm(render_heatmap(grid, scale), out);
    return 0;
}

int cmd_replay(const StrategyFlags & flags, const std::string & trace_path, double temperature,
               uint64_t seed, double threshold, const fs::path & out_dir) {
    const SamplerConfig sampler = flags.resolve();
    const LogitTrace trace = read_trace_file(trace_path);
    const ReplayResult result = replay(trace, sampler, temperature, seed, threshold);

    fs::create_directories(out_dir);
    std::vector<std::string> outputs;

    const fs::path tokens_path = out_dir / "tokens.csv";
    {
        std::ofstream out(tokens_path, std::ios::binary);
        if (!out) {
            throw Error(ErrorCode::sink_failure, "cannot open " + tokens_path.string());
        }
        out << "frame,site,token\n";
        for (size_t t = 0; t < result.tokens.size(); ++t) {
            for (size_t i = 0; i < result.tokens[t].size(); ++i) {
                out << t << "," << i << "," << result.tokens[t][i] << "\n";
            }
        }
    }
    outputs.push_back("tokens.csv");

    const fs::path csv_path = out_dir / "collapse.csv";
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) {
            throw Error(ErrorCode::sink_failure, "cannot open " + csv_path.string());
        }
        write_collapse_csv(result.report, out);
    }
    outputs.push_back("collapse.csv");

    json summary;
    summary["strategy"] = sampler.label();
    summary["trace"] = trace_path;
    summary["frames"] = trace.header.frames;
    summary["final_frame_avg_entropy"] = result.report.frame_avg_entropy.back();
    const fs::path summary_path = out_dir / "summary.json";
    write_text_file(summary_path, summary.dump(2) + "\n");
    outputs.push_back("summary.json");

    json cfg = flags.to_json();
    cfg["trace"] = trace_path;
    cfg["temperature"] = temperature;
    cfg["threshold"] = threshold;
    write_manifest(out_dir, "replay", cfg, {seed}, outputs);

    std::cout << summary.dump() << "\n";
    return 0;
}

} // namespace

int main(int argc, char ** argv) {
    CLI::App app{"entropy-guided decoding toolkit"};
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);
    app.fallthrough(); // lets --seed appear after the subcommand name

    uint64_t seed = 0;
    auto * seed_opt = app.add_option("--seed", seed, "run seed (u64)")->capture_default_str();
    std::string config_path;
    app.add_option("--config", config_path,
                   "JSON config file; command-line flags take precedence");

    // sample
    auto * sample = app.add_subcommand("sample", "sample one token and print diagnostics");
    StrategyFlags sample_flags;
    sample_flags.attach(sample);
    std::string probs_csv, sample_trace;
    int uniform_v = 0, sample_frame = 0, sample_site = 0;
    double sample_temp = 1.0;
    sample->add_option("--probs", probs_csv, "inline comma-separated probabilities");
    sample->add_option("--uniform", uniform_v, "uniform distribution over V tokens");
    sample->add_option("--trace", sample_trace, "read the distribution from a .lgtr trace");
    sample->add_option("--frame", sample_frame, "trace frame index");
    sample->add_option("--site", sample_site, "trace site index");
    sample->add_option("--softmax-temp", sample_temp, "softmax temperature for trace logits");

    // rollout
    auto * roll = app.add_subcommand("rollout", "simulate and write trace/CSV/heatmaps/summary");
    StrategyFlags roll_flags;
    roll_flags.attach(roll);
    int frames = 50, height = 16, width = 16, vocab = 16, spread = 4, heatmap_scale = 16;
    double p0 = 0.4, delta = 0.1, p_max = 0.95, threshold = 0.25;
    std::string roll_out = "out";
    roll->add_option("--frames", frames, "frames to generate")->capture_default_str();
    roll->add_option("--height", height)->capture_default_str();
    roll->add_option("--width", width)->capture_default_str();
    roll->add_option("--vocab", vocab)->capture_default_str();
    roll->add_option("--p0", p0, "base self-transition mass")->capture_default_str();
    roll->add_option("--delta", delta, "confidence growth per repeat")->capture_default_str();
    roll->add_option("--p-max", p_max, "confidence ceiling")->capture_default_str();
    roll->add_option("--texture-spread", spread)->capture_default_str();
    roll->add_option("--threshold", threshold, "low-entropy threshold")->capture_default_str();
    roll->add_option("--heatmap-scale", heatmap_scale)->capture_default_str();
    roll->add_option("--out", roll_out, "output directory")->capture_default_str();

    // sweep
    auto * sweep = app.add_subcommand("sweep", "run a hyperparameter grid and emit CSV");
    std::string sweep_spec_path, sweep_out;
    int jobs = 1;
    sweep->add_option("--spec", sweep_spec_path, "JSON sweep spec")->required();
    sweep->add_option("--out", sweep_out, "CSV output path ('-' for stdout)");
    sweep->add_option("--jobs", jobs, "concurrent grid cells")->capture_default_str();

    // heatmap
    auto * heat = app.add_subcommand("heatmap", "render one trace frame as a PPM heatmap");
    std::string heat_trace, heat_out = "heatmap.ppm";
    int heat_frame = 0, heat_scale = 16, heat_h = 0, heat_w = 0;
    double heat_temp = 1.0;
    heat->add_option("--trace", heat_trace, ".lgtr trace path")->required();
    heat->add_option("--frame", heat_frame, "frame index")->capture_default_str();
    heat->add_option("--out", heat_out, "output PPM path")->capture_default_str();
    heat->add_option("--temp", heat_temp, "softmax temperature")->capture_default_str();
    heat->add_option("--scale", heat_scale, "pixel replication factor")->capture_default_str();
    heat->add_option("--height", heat_h, "grid height (default: square)");
    heat->add_option("--width", heat_w, "grid width (default: square)");

    // replay
    auto * rep = app.add_subcommand("replay", "decode a recorded trace with any strategy");
    StrategyFlags rep_flags;
    rep_flags.attach(rep);
    std::string rep_trace, rep_out = "replay_out";
    double rep_temp = 1.0, rep_threshold = 0.25;
    rep->add_option("--trace", rep_trace, ".lgtr trace path")->required();
    rep->add_option("--softmax-temp", rep_temp, "softmax temperature")->capture_default_str();
    rep->add_option("--threshold", rep_threshold)->capture_default_str();
    rep->add_option("--out", rep_out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError & e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                throw Error(ErrorCode::source_failure, "cannot open config " + config_path);
            }
            json cfg;
            try {
                in >> cfg;
            } catch (const json::exception & e) {
                throw Error(ErrorCode::invalid_config,
                            std::string("config: bad JSON: ") + e.what());
            }
            if (cfg.contains("seed") && seed_opt->count() == 0) {
                cfg.at("seed").get_to(seed);
            }
            sample_flags.apply_config(cfg);
            roll_flags.apply_config(cfg);
            rep_flags.apply_config(cfg);
        }

        if (sample->parsed()) {
            return cmd_sample(sample_flags, probs_csv, uniform_v, sample_trace, sample_frame,
                              sample_site, sample_temp, seed);
        }
        if (roll->parsed()) {
            const SceneSpec scene =
                scene_from_flags(height, width, vocab, p0, delta, p_max, spread);
            return cmd_rollout(roll_flags, scene, frames, seed, roll_out, threshold,
                               heatmap_scale);
        }
        if (sweep->parsed()) {
            return cmd_sweep(sweep_spec_path, sweep_out, jobs);
        }
        if (heat->parsed()) {
            return cmd_heatmap(heat_trace, heat_frame, heat_out, heat_temp, heat_scale, heat_h,
                               heat_w);
        }
        if (rep->parsed()) {
            return cmd_replay(rep_flags, rep_trace, rep_temp, seed, rep_threshold, rep_out);
        }
    } catch (const Error & e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.category()) {
            case ErrorCategory::config:  return 2;
            case ErrorCategory::io:      return 3;
            case ErrorCategory::numeric: return 4;
        }
        return 4;
    } catch (const std::exception & e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
