#pragma once

#include "enkg/diagnostics.hpp"
#include "enkg/samplers.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace enkg {

// .lgtr binary layout, all little-endian, no padding:
//   magic "LGTR" | u32 version | u32 vocab | u32 frames | u32 sites | u8 dtype
// followed by frames * sites logit vectors of vocab float32 each,
// frame-major then site-major.
struct TraceHeader {
    static constexpr uint32_t supported_version = 1;
    static constexpr uint8_t  dtype_f32le       = 0;

    uint32_t version = supported_version;
    uint32_t vocab   = 0;
    uint32_t frames  = 0;
    uint32_t sites   = 0; // sites per frame
    uint8_t  dtype   = dtype_f32le;
};

struct LogitTrace {
    TraceHeader        header;
    std::vector<float> payload; // frames * sites * vocab

    // Logit vector at (frame, site).
    const float * cell(uint32_t frame, uint32_t site) const {
        return payload.data() +
               (static_cast<size_t>(frame) * header.sites + site) * header.vocab;
    }
};

void validate(const LogitTrace & trace);

void write_trace(const LogitTrace & trace, std::ostream & sink);
void write_trace_file(const LogitTrace & trace, const std::string & path);

LogitTrace read_trace(std::istream & source);
LogitTrace read_trace_file(const std::string & path);

struct ReplayResult {
    std::vector<std::vector<TokenId>>           tokens;      // [frames][sites]
    std::vector<std::vector<SampleDiagnostics>> diagnostics; // [frames][sites]
    CollapseReport                              report;
};

// Decode a recorded trace offline: per (frame, site), softmax at the
// given temperature, then the configured sampler on the substream seed
// derived from (seed, frame + 1, site) — the same numbering the
// simulator uses, so replays line up with live rollouts.
ReplayResult replay(const LogitTrace & trace, const SamplerConfig & sampler,
                    double temperature, uint64_t seed, double collapse_threshold);

} // namespace enkg
