#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lfm {

/// Failure categories raised by the toolkit. Each maps to a distinct CLI exit code.
enum class ErrorCode {
    InvalidArgument,
    DivisionByZeroLevel,
    InsufficientLength,
    MissingInWindow,
    MissingValue,
    WindowTooLarge,
    FrequencyMismatch,
    EmptyOverlap,
    MissingRegressor,
    CoverageGap,
    SegmentTooShort,
    EmptyGrid,
    DegenerateInput,
    InsufficientOverlap,
    ZeroVariance,
    SingularRegression,
    DegenerateResidual,
    SingularCovariance,
    ParseError,
    DuplicatePeriod,
    UnitMismatch,
    EmptyResult,
    InvalidManifest,
    InvalidConfig,
    UnknownPreset,
    MissingSeries,
    IoError,
    TableMissing,
};

[[nodiscard]] std::string_view error_name(ErrorCode code) noexcept;

/// Process exit code for a module error (10 + ordinal; 0-9 are reserved for the CLI itself).
[[nodiscard]] int exit_code(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace lfm
