#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "lfm/series.hpp"

namespace lfm {

enum class RegressorKind {
    LfGrowth,      ///< dLF/LF, relative labor-force change per year
    Unemployment,  ///< UE, rate of unemployment
    CpiInflation,  ///< CPI inflation rate
};

[[nodiscard]] std::string_view to_string(RegressorKind k) noexcept;
[[nodiscard]] RegressorKind parse_regressor_kind(std::string_view text);

struct Regressor {
    RegressorKind kind = RegressorKind::LfGrowth;
    int lag = 0;  ///< in periods of the owning model's frequency

    auto operator<=>(const Regressor&) const = default;
};

/// One linear regime. Open ends (nullopt) extend as far as the input data reaches.
struct Segment {
    std::optional<Period> start;  ///< inclusive
    std::optional<Period> end;    ///< inclusive
    std::map<Regressor, double> slopes;
    double intercept = 0.0;

    [[nodiscard]] bool contains(const Period& p) const;
    [[nodiscard]] double slope(RegressorKind kind) const;
    [[nodiscard]] const Regressor& regressor(RegressorKind kind) const;
};

/// Inputs keyed by regressor kind; each series is at the model's frequency.
using InputMap = std::map<RegressorKind, Series>;

/**
 * Piecewise-linear lagged model:
 *   target(t) = intercept_s + sum_k slope_{s,k} * input_k(t - lag_{s,k})
 * for the unique segment s containing t.
 */
class SegmentedModel {
public:
    SegmentedModel(std::string target, Frequency frequency, std::vector<Segment> segments);

    [[nodiscard]] const std::string& target() const noexcept { return target_; }
    [[nodiscard]] Frequency frequency() const noexcept { return frequency_; }
    [[nodiscard]] const std::vector<Segment>& segments() const noexcept { return segments_; }
    [[nodiscard]] std::vector<RegressorKind> regressor_kinds() const;
    /// Index of the segment containing `p`, if any.
    [[nodiscard]] std::optional<std::size_t> segment_index(const Period& p) const;

    /// Copy whose last segment has no end.
    [[nodiscard]] SegmentedModel extended_forward() const;

private:
    std::string target_;
    Frequency frequency_;
    std::vector<Segment> segments_;
};

/**
 * Evaluates the model wherever every lagged input is available. Periods
 * outside all segments are dropped at the ends and marked missing between
 * segments. Throws MissingRegressor, FrequencyMismatch, or CoverageGap
 * (missing input values inside a segment, or no overlap at all).
 */
[[nodiscard]] Series evaluate(const SegmentedModel& model, const InputMap& inputs);

/// `horizon` periods starting at the first period the projections cover, last segment extended.
[[nodiscard]] Series forecast(const SegmentedModel& model, const InputMap& projections, int horizon);

/// The fitted Australian models, keyed by name.
[[nodiscard]] std::map<std::string, SegmentedModel> australian_presets();
[[nodiscard]] SegmentedModel preset(const std::string& name);

void to_json(nlohmann::json& j, const SegmentedModel& model);
[[nodiscard]] SegmentedModel model_from_json(const nlohmann::json& j);

}  // namespace lfm
