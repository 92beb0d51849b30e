#include "jointflow/error.hpp"

namespace jointflow {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnsortedTimestamps: return "UnsortedTimestamps";
        case ErrorCode::NonPositiveSize: return "NonPositiveSize";
        case ErrorCode::NegativeTimestamp: return "NegativeTimestamp";
        case ErrorCode::InvalidProfile: return "InvalidProfile";
        case ErrorCode::ZeroScale: return "ZeroScale";
        case ErrorCode::InvalidWindowing: return "InvalidWindowing";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::SeriesTooShort: return "SeriesTooShort";
        case ErrorCode::MissingClassData: return "MissingClassData";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::Empty: return "Empty";
        case ErrorCode::EmptyWindow: return "EmptyWindow";
        case ErrorCode::UnknownLabel: return "UnknownLabel";
        case ErrorCode::InvalidEncoding: return "InvalidEncoding";
        case ErrorCode::InvalidMismatch: return "InvalidMismatch";
        case ErrorCode::InvalidAlphas: return "InvalidAlphas";
        case ErrorCode::Config: return "ConfigError";
        case ErrorCode::Io: return "IoError";
        case ErrorCode::Parse: return "ParseError";
    }
    return "UnknownError";
}

bool is_data_error(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnsortedTimestamps:
        case ErrorCode::NonPositiveSize:
        case ErrorCode::NegativeTimestamp:
        case ErrorCode::ZeroScale:
        case ErrorCode::EmptyDataset:
        case ErrorCode::SeriesTooShort:
        case ErrorCode::MissingClassData:
        case ErrorCode::UnknownLabel:
        case ErrorCode::Io:
        case ErrorCode::Parse:
            return true;
        default:
            return false;
    }
}

bool is_config_error(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidProfile:
        case ErrorCode::InvalidWindowing:
        case ErrorCode::InvalidSpec:
        case ErrorCode::InvalidEncoding:
        case ErrorCode::InvalidMismatch:
        case ErrorCode::InvalidAlphas:
        case ErrorCode::Config:
            return true;
        default:
            return false;
    }
}

}  // namespace jointflow
