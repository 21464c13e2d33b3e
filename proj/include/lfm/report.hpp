#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "lfm/calibrate.hpp"
#include "lfm/econotest.hpp"
#include "lfm/ingest.hpp"

namespace lfm {

enum class Command { Validate, Fit, Predict, Diagnose, Forecast, Report, Synthesize };

[[nodiscard]] std::string_view to_string(Command c) noexcept;
[[nodiscard]] Command parse_command(std::string_view text);

struct RunSpec {
    Command command = Command::Report;
    std::string manifest;
    std::string config;
    std::string preset;  ///< model source for predict/forecast, generator for synthesize
    std::string model;   ///< fitted model JSON (overrides preset)
    std::string target;  ///< fit target role; overrides the config
    std::string out_dir = "out";
    std::uint64_t seed = 20111014;
    std::string from;                 ///< clip every series at this period
    std::vector<std::string> breaks;  ///< overrides the config breaks
    std::optional<int> horizon;
    std::string origin;  ///< last period treated as known in forecast
};

struct DiagnosticsConfig {
    int adf_lags = 1;
    Deterministic adf_deterministic = Deterministic::Constant;
    std::vector<int> dfgls_lags{1, 2, 3, 4};
    int pp_bandwidth = -1;
    int eg_lags = 1;
    int johansen_lags = 2;
    JohansenTrend johansen_trend = JohansenTrend::None;
    SignificanceLevel level = SignificanceLevel::Pct5;
};

/// Contents of the --config file: FitConfig fields plus run-level settings.
struct RunConfig {
    std::string target;  ///< empty: taken from the preset, else UE
    std::optional<Frequency> frequency;
    std::optional<GrowthSpec> growth;
    FitConfig fit;
    bool has_slope_grid = false;
    DiagnosticsConfig diagnostics;
    int horizon = 0;
    std::optional<std::string> from;
};

[[nodiscard]] RunConfig run_config_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const RunConfig& cfg);

struct ChartLine {
    std::string label;
    Series series;
};

/// Standalone SVG line chart over a shared period axis; missing values break the line.
[[nodiscard]] std::string svg_line_chart(const std::string& title, const std::string& y_label,
                                         const std::vector<ChartLine>& lines);

/**
 * Writes a synthetic dataset (CSV files, manifest.json, config.json) into
 * `dir`, generated from the named preset with seeded noise.
 */
void synthesize(const std::string& dir, const std::string& preset_name, std::uint64_t seed);

/// Executes one command. Returns the process exit status; on failure an error
/// record is written to `err` and to <out>/error.json.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err);

}  // namespace lfm
