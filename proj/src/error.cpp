#include "aggpi/error.hpp"

namespace aggpi {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::InsufficientWindows: return "InsufficientWindows";
    case ErrorCode::BandwidthNonPositive: return "BandwidthNonPositive";
    case ErrorCode::ColumnMismatch: return "ColumnMismatch";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::UnstableSpec: return "UnstableSpec";
    case ErrorCode::TooManyFrequencies: return "TooManyFrequencies";
    case ErrorCode::DivergentCoefficientSum: return "DivergentCoefficientSum";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

bool is_numeric_failure(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::RankDeficient:
    case ErrorCode::NonConvergence:
    case ErrorCode::EmptyInput:
    case ErrorCode::InsufficientData:
    case ErrorCode::InsufficientWindows:
    case ErrorCode::BandwidthNonPositive:
    case ErrorCode::TruncationTooSmall:
    case ErrorCode::UnstableSpec:
    case ErrorCode::DivergentCoefficientSum:
        return true;
    default:
        return false;
    }
}

}  // namespace aggpi
