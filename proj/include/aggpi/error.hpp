#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aggpi {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    RankDeficient,
    NonConvergence,
    EmptyGrid,
    EmptyInput,
    InsufficientData,
    InvalidAlpha,
    InsufficientWindows,
    BandwidthNonPositive,
    ColumnMismatch,
    AlphaOutOfRange,
    TruncationTooSmall,
    UnstableSpec,
    TooManyFrequencies,
    DivergentCoefficientSum,
    ConfigInvalid,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Errors raised by the library. The code identifies the failure class so
/// callers (harness, CLI) can decide between NA, exit status, and rethrow.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// True for failures caused by the input data or the numerics rather than
/// by a malformed request (CLI exit status 3 instead of 2).
bool is_numeric_failure(ErrorCode code) noexcept;

}  // namespace aggpi
