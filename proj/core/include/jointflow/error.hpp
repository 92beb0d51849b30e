#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jointflow {

enum class ErrorCode {
    // trace_model
    UnsortedTimestamps,
    NonPositiveSize,
    NegativeTimestamp,
    // synth_gen
    InvalidProfile,
    // features
    ZeroScale,
    InvalidWindowing,
    // mlp
    DimensionMismatch,
    EmptyDataset,
    InvalidSpec,
    // predictor_bank
    SeriesTooShort,
    MissingClassData,
    LengthMismatch,
    Empty,
    EmptyWindow,
    // joint_classifier
    UnknownLabel,
    InvalidEncoding,
    // harness
    InvalidMismatch,
    InvalidAlphas,
    // plumbing
    Config,
    Io,
    Parse,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Whether an error stems from bad input data (as opposed to bad configuration
/// or a bug). Drives the CLI exit code.
bool is_data_error(ErrorCode code) noexcept;

/// Whether an error stems from an invalid configuration value.
bool is_config_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace jointflow
