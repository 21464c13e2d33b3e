#pragma once

#include <cstddef>
#include <map>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "lfm/model.hpp"
#include "lfm/series.hpp"

namespace lfm {

/// Inclusive arithmetic grid min, min+step, ..., <= max.
struct GridRange {
    double min = 0.0;
    double max = 0.0;
    double step = 0.0;

    void validate(std::string_view what) const;
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] double value(std::size_t i) const;
};

enum class Objective {
    CumRms,          ///< RMS distance between observed and predicted cumulative curves
    CumEndpointRel,  ///< largest relative distance between the cumulative curves
};

enum class SearchMode {
    Auto,        ///< exhaustive unless the grid is too large, then two-stage
    Exhaustive,
    TwoStage,    ///< slopes on a grid coarsened by refine_factor, then refined at full resolution
};

[[nodiscard]] std::string_view to_string(Objective o) noexcept;
[[nodiscard]] std::string_view to_string(SearchMode m) noexcept;

struct FitConfig {
    /// First period of each new segment, strictly increasing.
    std::vector<Period> breaks;
    /// One entry per regressor; its keys define the model's regressors.
    std::map<RegressorKind, GridRange> slope_grid;
    GridRange intercept_grid{-0.2, 0.2, 0.001};
    /// Candidate lags per regressor; regressors without an entry use {0}.
    std::map<RegressorKind, std::vector<int>> lag_grid;
    Objective objective = Objective::CumRms;
    SearchMode search = SearchMode::Auto;
    int refine_factor = 10;
    /// Worker threads for the grid scan; 0 picks the hardware concurrency. Results do not depend on it.
    int threads = 0;

    /// Slopes in [-10, 10] step 0.01, intercept in [-0.2, 0.2] step 0.001, lags {0, 1, 2, 3}.
    static FitConfig defaults(const std::vector<RegressorKind>& kinds);

    void validate() const;
    [[nodiscard]] std::vector<RegressorKind> kinds() const;
    [[nodiscard]] std::vector<int> lags(RegressorKind kind) const;
};

void to_json(nlohmann::json& j, const FitConfig& cfg);
/// Reads the FitConfig fields of `j`; unknown keys are ignored.
[[nodiscard]] FitConfig fit_config_from_json(const nlohmann::json& j);

struct FitResult {
    SegmentedModel model;
    double r2_dynamic = 0.0;
    double r2_cumulative = 0.0;
    Series observed;
    Series predicted;
    Series residual;  ///< observed - predicted on the fit range
    double objective_value = 0.0;
    std::vector<double> segment_objectives;
};

void to_json(nlohmann::json& j, const FitResult& result);
void to_json(nlohmann::json& j, const Series& s);

/**
 * Calibrates a segmented model by matching cumulative curves.
 *
 * Each segment (delimited by cfg.breaks) is fitted on its own: the running
 * sums of observed and predicted values restart at the segment start, and
 * the grid point minimizing the objective wins. Ties prefer smaller |slope|,
 * then smaller |intercept|, then smaller lag.
 */
[[nodiscard]] FitResult fit_cumulative(const Series& observed, const InputMap& inputs, const FitConfig& cfg);

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least squares of observed(t) on input(t - lag).
[[nodiscard]] OlsFit fit_ols(const Series& observed, const Series& input, int lag = 0);

struct Goodness {
    double r2_dynamic = 0.0;
    double r2_cumulative = 0.0;
};

[[nodiscard]] Goodness goodness(const Series& observed, const Series& predicted);

struct BreakScore {
    Period period;
    double objective = 0.0;
};

/// Single-break fits for every candidate, best (lowest objective) first.
[[nodiscard]] std::vector<BreakScore> break_scan(const Series& observed, const InputMap& inputs,
                                                 const std::vector<Period>& candidates, const FitConfig& cfg);

/// Root-mean-square forecast error over the common non-missing range.
[[nodiscard]] double rmsfe(const Series& observed, const Series& predicted, int horizon);

}  // namespace lfm
