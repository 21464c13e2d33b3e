#include "lfm/error.hpp"

#include <array>

namespace lfm {

namespace {

constexpr std::array<std::string_view, 28> kNames = {
    "InvalidArgument",  "DivisionByZeroLevel", "InsufficientLength", "MissingInWindow",
    "MissingValue",     "WindowTooLarge",      "FrequencyMismatch",  "EmptyOverlap",
    "MissingRegressor", "CoverageGap",         "SegmentTooShort",    "EmptyGrid",
    "DegenerateInput",  "InsufficientOverlap", "ZeroVariance",       "SingularRegression",
    "DegenerateResidual", "SingularCovariance", "ParseError",        "DuplicatePeriod",
    "UnitMismatch",     "EmptyResult",         "InvalidManifest",    "InvalidConfig",
    "UnknownPreset",    "MissingSeries",       "IoError",            "TableMissing",
};

static_assert(kNames.size() == static_cast<std::size_t>(ErrorCode::TableMissing) + 1);

}  // namespace

std::string_view error_name(ErrorCode code) noexcept {
    return kNames[static_cast<std::size_t>(code)];
}

int exit_code(ErrorCode code) noexcept { return 10 + static_cast<int>(code); }

}  // namespace lfm
