#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "lfm/series.hpp"

namespace lfm {

enum class UnitRootTest { Adf, DfGls, Pp };
enum class Deterministic { None, Constant, ConstantTrend };
enum class SignificanceLevel { Pct1, Pct5, Pct10 };

[[nodiscard]] std::string_view to_string(UnitRootTest t) noexcept;
[[nodiscard]] std::string_view to_string(Deterministic d) noexcept;
[[nodiscard]] std::string_view to_string(SignificanceLevel l) noexcept;
[[nodiscard]] Deterministic parse_deterministic(std::string_view text);
[[nodiscard]] SignificanceLevel parse_level(std::string_view text);

/// Critical values at the 1%, 5% and 10% test sizes.
struct CriticalValues {
    double pct1 = 0.0;
    double pct5 = 0.0;
    double pct10 = 0.0;

    [[nodiscard]] double at(SignificanceLevel l) const noexcept;
};

struct Decisions {
    bool pct1 = false;
    bool pct5 = false;
    bool pct10 = false;

    [[nodiscard]] bool at(SignificanceLevel l) const noexcept;
};

struct UnitRootReport {
    UnitRootTest test = UnitRootTest::Adf;
    double stat_t = 0.0;
    std::optional<double> stat_rho;
    int lags = 0;
    Deterministic deterministic = Deterministic::Constant;
    std::size_t nobs = 0;  ///< observations in the test regression
    CriticalValues critical;
    Decisions reject_at;  ///< stat_t < critical (left tail)
    std::optional<CriticalValues> critical_rho;
    std::optional<Decisions> reject_rho_at;
};

/// Augmented Dickey-Fuller: regress diff(s) on s(t-1), `lags` lagged differences and deterministic terms.
[[nodiscard]] UnitRootReport adf_test(std::span<const double> s, int lags,
                                      Deterministic deterministic = Deterministic::Constant);
[[nodiscard]] UnitRootReport adf_test(const Series& s, int lags, Deterministic deterministic = Deterministic::Constant);

/// floor(4 * (n / 100)^(2/9)).
[[nodiscard]] int default_pp_bandwidth(std::size_t n) noexcept;

/**
 * Phillips-Perron with a constant: the unaugmented DF regression, with
 * z(rho) and z(t) corrected by a Bartlett-kernel long-run variance.
 * A negative bandwidth selects default_pp_bandwidth.
 */
[[nodiscard]] UnitRootReport pp_test(std::span<const double> s, int bandwidth = -1);
[[nodiscard]] UnitRootReport pp_test(const Series& s, int bandwidth = -1);

/// DF-GLS: GLS demeaning with alpha = 1 - 7/n, then an ADF regression without deterministic terms.
[[nodiscard]] UnitRootReport dfgls_test(std::span<const double> s, int lags);
[[nodiscard]] UnitRootReport dfgls_test(const Series& s, int lags);

enum class JohansenTrend { None, Constant };

[[nodiscard]] std::string_view to_string(JohansenTrend t) noexcept;
[[nodiscard]] JohansenTrend parse_johansen_trend(std::string_view text);

struct JohansenResult {
    int rank = 0;
    std::vector<double> eigenvalues;  ///< descending, in [0, 1)
    std::vector<double> trace_stats;  ///< trace_stats[r] tests rank <= r
    std::vector<CriticalValues> trace_critical;
    JohansenTrend trend = JohansenTrend::None;
    int lags = 2;
    std::size_t nobs = 0;
    SignificanceLevel level = SignificanceLevel::Pct5;
};

struct CointegrationReport {
    std::optional<UnitRootReport> engle_granger;  ///< ADF on the cointegrating-regression residual
    std::optional<double> eg_slope;
    std::optional<double> eg_intercept;
    std::optional<bool> eg_cointegrated;  ///< at eg_level
    SignificanceLevel eg_level = SignificanceLevel::Pct5;
    std::optional<JohansenResult> johansen;
};

/// Engle-Granger two-step: OLS of y on x with a constant, then ADF on the residual.
[[nodiscard]] CointegrationReport engle_granger(const Series& y, const Series& x, int lags = 1,
                                                SignificanceLevel level = SignificanceLevel::Pct5);

/**
 * Johansen trace test for a bivariate system. `lags` is the VAR order in
 * levels (lags - 1 lagged differences enter the VECM).
 */
[[nodiscard]] CointegrationReport johansen_test(const std::vector<Series>& series, int lags = 2,
                                                JohansenTrend trend = JohansenTrend::None,
                                                SignificanceLevel level = SignificanceLevel::Pct5);

// --- critical values -----------------------------------------------------------------

/// Statistics with simulated null distributions.
enum class CriticalStat {
    AdfT,
    AdfRho,
    PpT,
    PpRho,
    DfglsT,
    EngleGrangerT,
    JohansenTrace1,  ///< trace statistic with one common stochastic trend (p - r = 1)
    JohansenTrace2,  ///< p - r = 2
};

[[nodiscard]] std::string_view to_string(CriticalStat s) noexcept;
[[nodiscard]] CriticalStat parse_critical_stat(std::string_view text);
/// Right-tailed statistics reject for large values (the Johansen trace).
[[nodiscard]] bool right_tailed(CriticalStat s) noexcept;

/**
 * Monte Carlo quantiles of `stat` under the unit-root (or no-cointegration)
 * null for a test regression with `n` observations. Replications are split
 * into fixed batches of 1000 with batch-derived seeds, so the result
 * depends only on (stat, n, deterministic, replications, seed).
 */
[[nodiscard]] CriticalValues simulate_critical_values(CriticalStat stat, std::size_t n, Deterministic deterministic,
                                                      std::size_t replications, std::uint64_t seed = 20111014);

struct CriticalTableRow {
    CriticalStat stat;
    std::size_t n;
    Deterministic deterministic;
    SignificanceLevel level;
    double value;
};

/// Parses the shipped CSV layout: test,n,deterministic,level,value ('#' lines are comments).
[[nodiscard]] std::vector<CriticalTableRow> parse_critical_table(std::string_view csv);
[[nodiscard]] std::string format_critical_table(const std::vector<CriticalTableRow>& rows, std::string_view version);

/// The embedded table, parsed once.
[[nodiscard]] const std::vector<CriticalTableRow>& critical_table();
[[nodiscard]] std::string_view critical_table_version();

/// Interpolates linearly in 1/n between tabulated sample sizes (clamped at the smallest n,
/// extrapolated toward 1/n = 0 beyond the largest).
[[nodiscard]] CriticalValues lookup_critical(CriticalStat stat, std::size_t n, Deterministic deterministic);
[[nodiscard]] CriticalValues lookup_critical(const std::vector<CriticalTableRow>& table, CriticalStat stat,
                                             std::size_t n, Deterministic deterministic);

void to_json(nlohmann::json& j, const CriticalValues& c);
void to_json(nlohmann::json& j, const Decisions& d);
void to_json(nlohmann::json& j, const UnitRootReport& r);
void to_json(nlohmann::json& j, const JohansenResult& r);
void to_json(nlohmann::json& j, const CointegrationReport& r);

}  // namespace lfm
