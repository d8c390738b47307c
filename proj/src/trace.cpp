#include "enkg/trace.hpp"

#include "enkg/error.hpp"
#include "enkg/rng.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace enkg {

static_assert(std::endian::native == std::endian::little,
              "trace i/o assumes a little-endian host");

static constexpr char trace_magic[4] = {'L', 'G', 'T', 'R'};

void validate(const LogitTrace & trace) {
    const auto & h = trace.header;
    if (h.version != TraceHeader::supported_version) {
        throw Error(ErrorCode::unsupported_version, "trace: unsupported version");
    }
    if (h.dtype != TraceHeader::dtype_f32le) {
        throw Error(ErrorCode::unsupported_version, "trace: unsupported dtype");
    }
    if (h.vocab < 2 || h.frames < 1 || h.sites < 1) {
        throw Error(ErrorCode::invalid_spec, "trace: require vocab >= 2, frames >= 1, sites >= 1");
    }
    const size_t expected = static_cast<size_t>(h.frames) * h.sites * h.vocab;
    if (trace.payload.size() != expected) {
        throw Error(ErrorCode::truncated_payload, "trace: payload length mismatch");
    }
    for (float v : trace.payload) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::non_finite_logit, "trace: non-finite logit");
        }
    }
}

template <typename T>
static void put_le(std::ostream & out, T value) {
    out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
static T get_le(std::istream & in) {
    T value{};
    in.read(reinterpret_cast<char *>(&value), sizeof(T));
    if (!in) {
        throw Error(ErrorCode::truncated_payload, "trace: unexpected end of stream");
    }
    return value;
}

void write_trace(const LogitTrace & trace, std::ostream & sink) {
    validate(trace);
    sink.write(trace_magic, 4);
    put_le(sink, trace.header.version);
    put_le(sink, trace.header.vocab);
    put_le(sink, trace.header.frames);
    put_le(sink, trace.header.sites);
    put_le(sink, trace.header.dtype);
    sink.write(reinterpret_cast<const char *>(trace.payload.data()),
               static_cast<std::streamsize>(trace.payload.size() * sizeof(float)));
    if (!sink) {
        throw Error(ErrorCode::sink_failure, "trace: write failed");
    }
}

void write_trace_file(const LogitTrace & trace, const std::string & path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::sink_failure, "trace: cannot open " + path + " for writing");
    }
    write_trace(trace, out);
}

LogitTrace read_trace(std::istream & source) {
    char magic[4];
    source.read(magic, 4);
    if (!source || std::memcmp(magic, trace_magic, 4) != 0) {
        throw Error(ErrorCode::bad_magic, "trace: bad magic");
    }
    LogitTrace trace;
    trace.header.version = get_le<uint32_t>(source);
    if (trace.header.version != TraceHeader::supported_version) {
        throw Error(ErrorCode::unsupported_version, "trace: unsupported version");
    }
    trace.header.vocab  = get_le<uint32_t>(source);
    trace.header.frames = get_le<uint32_t>(source);
    trace.header.sites  = get_le<uint32_t>(source);
    trace.header.dtype  = get_le<uint8_t>(source);
    if (trace.header.vocab < 2 || trace.header.frames < 1 || trace.header.sites < 1) {
        throw Error(ErrorCode::invalid_spec, "trace: invalid header dimensions");
    }

    const size_t count = static_cast<size_t>(trace.header.frames) * trace.header.sites *
                         trace.header.vocab;
    trace.payload.resize(count);
    source.read(reinterpret_cast<char *>(trace.payload.data()),
                static_cast<std::streamsize>(count * sizeof(float)));
    if (source.gcount() != static_cast<std::streamsize>(count * sizeof(float))) {
        throw Error(ErrorCode::truncated_payload, "trace: payload shorter than header claims");
    }
    validate(trace);
    return trace;
}

LogitTrace read_trace_file(const std::string & path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::source_failure, "trace: cannot open " + path);
    }
    return read_trace(in);
}

ReplayResult replay(const LogitTrace & trace, const SamplerConfig & sampler,
                    double temperature, uint64_t seed, double collapse_threshold) {
    validate(trace);
    validate(sampler);

    ReplayResult result;
    result.report.threshold = collapse_threshold;
    const uint32_t frames = trace.header.frames;
    const uint32_t sites  = trace.header.sites;
    const uint32_t vocab  = trace.header.vocab;

    std::vector<double> logits(vocab);
    std::vector<ProbabilityDistribution> frame_dists(sites);
    for (uint32_t t = 0; t < frames; ++t) {
        std::vector<TokenId>           tokens(sites);
        std::vector<SampleDiagnostics> diags(sites);
        for (uint32_t i = 0; i < sites; ++i) {
            const float * cell = trace.cell(t, i);
            for (uint32_t v = 0; v < vocab; ++v) {
                logits[v] = cell[v];
            }
            frame_dists[i] = softmax(logits, temperature);
            Xoshiro256StarStar rng(substream_seed(seed, t + 1, i));
            auto [token, diag] = sample_with(sampler, frame_dists[i], rng);
            tokens[i] = token;
            diags[i]  = diag;
        }
        const EntropyGrid grid = entropy_grid(frame_dists, static_cast<int>(t), 1,
                                              static_cast<int>(sites));
        const FrameStats stats = frame_stats(grid, frame_dists, collapse_threshold);
        result.report.frame_avg_entropy.push_back(stats.avg_entropy);
        result.report.low_entropy_share.push_back(stats.low_entropy_share);
        result.report.top1_mass_avg.push_back(stats.top1_mass_avg);
        result.tokens.push_back(std::move(tokens));
        result.diagnostics.push_back(std::move(diags));
    }
    return result;
}

} // namespace enkg
