#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lfm {

enum class Frequency { Annual, Quarterly, Monthly };

[[nodiscard]] int periods_per_year(Frequency f) noexcept;
[[nodiscard]] std::string_view to_string(Frequency f) noexcept;
[[nodiscard]] Frequency parse_frequency(std::string_view text);

/**
 * A point on a regular calendar grid: a year plus a 1-based quarter or month.
 *
 * Periods of different frequencies are not comparable; ordering or
 * differencing them throws FrequencyMismatch.
 */
class Period {
public:
    Period(Frequency freq, int year, int sub = 1);

    /// Parses "1994", "1994-Q2" or "1994-07" according to `freq`.
    static Period parse(std::string_view text, Frequency freq);
    /// Parses any of the three formats, inferring the frequency from the shape.
    static Period parse(std::string_view text);
    static Period from_ordinal(Frequency freq, std::int64_t ordinal);

    [[nodiscard]] Frequency frequency() const noexcept { return freq_; }
    [[nodiscard]] int year() const noexcept { return year_; }
    [[nodiscard]] int sub() const noexcept { return sub_; }

    /// Periods since year 0, sub 1.
    [[nodiscard]] std::int64_t ordinal() const noexcept;
    [[nodiscard]] std::string to_string() const;

    [[nodiscard]] Period operator+(std::int64_t n) const;
    [[nodiscard]] Period operator-(std::int64_t n) const { return *this + (-n); }
    /// Signed number of periods from `rhs` to `*this`.
    [[nodiscard]] std::int64_t operator-(const Period& rhs) const;

    [[nodiscard]] bool operator==(const Period& rhs) const noexcept = default;
    [[nodiscard]] std::strong_ordering operator<=>(const Period& rhs) const;

private:
    Frequency freq_;
    int year_;
    int sub_;
};

enum class Unit { Persons, RatePerYear, Index };

[[nodiscard]] std::string_view to_string(Unit u) noexcept;
[[nodiscard]] Unit parse_unit(std::string_view text);

/// Marker stored for missing observations.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
[[nodiscard]] bool is_missing(double v) noexcept;

/**
 * Regularly sampled series. Values are contiguous in time; missing
 * observations are explicit kMissing entries.
 *
 * Immutable after construction. An empty series is allowed only as the
 * result of a zero-length request (e.g. a zero-horizon forecast).
 */
class Series {
public:
    Series(Period start, std::vector<double> values, Unit unit, std::string role = {});

    [[nodiscard]] Frequency frequency() const noexcept { return start_.frequency(); }
    [[nodiscard]] const Period& start() const noexcept { return start_; }
    /// Last period (inclusive). Undefined for an empty series.
    [[nodiscard]] Period end() const { return start_ + static_cast<std::int64_t>(values_.size()) - 1; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] bool empty() const noexcept { return values_.empty(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] Unit unit() const noexcept { return unit_; }
    [[nodiscard]] const std::string& role() const noexcept { return role_; }

    [[nodiscard]] Period period_at(std::size_t i) const { return start_ + static_cast<std::int64_t>(i); }
    [[nodiscard]] bool contains(const Period& p) const;
    /// Value at `p`; throws CoverageGap if `p` is outside the series.
    [[nodiscard]] double at(const Period& p) const;
    [[nodiscard]] bool has_missing() const noexcept;

    /// Inclusive sub-range; both ends must lie inside the series.
    [[nodiscard]] Series slice(const Period& from, const Period& to) const;
    [[nodiscard]] Series with_role(std::string role) const;
    [[nodiscard]] Series with_unit(Unit unit) const;
    /// Same values relabeled so that the first value sits at `start`.
    [[nodiscard]] Series relabeled(Period start) const;

private:
    Period start_;
    std::vector<double> values_;
    Unit unit_;
    std::string role_;
};

enum class GrowthMethod {
    Backward,      ///< period-over-period change, annualized by periods per year
    YearOverYear,  ///< change against the same period one year earlier
};

[[nodiscard]] std::string_view to_string(GrowthMethod m) noexcept;
[[nodiscard]] GrowthMethod parse_growth_method(std::string_view text);

struct GrowthSpec {
    GrowthMethod method = GrowthMethod::Backward;
    int smooth_window = 0;  ///< 0 disables smoothing; otherwise >= 2

    void validate() const;
    /// Backward for annual and quarterly data, year-over-year for monthly data.
    static GrowthSpec default_for(Frequency f);
};

/// Relative change rate of a level series, in fractions per year.
[[nodiscard]] Series growth_rate(const Series& level, const GrowthSpec& spec);

/// Odd windows are centered, even windows are trailing.
[[nodiscard]] Series moving_average(const Series& s, int window);

/// Running sum of an annualized rate; sub-annual values contribute value / periods_per_year.
[[nodiscard]] Series cumulative(const Series& s);

/**
 * Pairs a(t) with b(t - lag_on_b) over their common range. The second
 * series of the result is relabeled onto a's time axis; both results have
 * equal length.
 */
[[nodiscard]] std::pair<Series, Series> align(const Series& a, const Series& b, int lag_on_b = 0);

}  // namespace lfm
