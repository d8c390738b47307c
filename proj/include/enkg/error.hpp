#pragma once

#include <stdexcept>
#include <string>

namespace enkg {

// Broad failure categories; the CLI maps these to process exit codes
// (config -> 2, io -> 3, numeric -> 4).
enum class ErrorCategory {
    config,
    io,
    numeric,
};

enum class ErrorCode {
    // numeric validation
    non_finite_input,
    invalid_temperature,
    negative_probability,
    non_finite_probability,
    mass_not_normalized,
    invalid_p_target,
    zero_mass_prefix,
    dimension_mismatch,
    invalid_threshold,
    uninitialized_state,
    // configuration
    invalid_params,
    invalid_spec,
    invalid_config,
    // trace / io
    bad_magic,
    unsupported_version,
    truncated_payload,
    non_finite_logit,
    sink_failure,
    source_failure,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string & what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

    ErrorCategory category() const {
        switch (code_) {
            case ErrorCode::invalid_params:
            case ErrorCode::invalid_spec:
            case ErrorCode::invalid_config:
                return ErrorCategory::config;
            case ErrorCode::bad_magic:
            case ErrorCode::unsupported_version:
            case ErrorCode::truncated_payload:
            case ErrorCode::sink_failure:
            case ErrorCode::source_failure:
                return ErrorCategory::io;
            default:
                return ErrorCategory::numeric;
        }
    }

private:
    ErrorCode code_;
};

} // namespace enkg
