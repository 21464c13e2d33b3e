#include "lfm/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "lfm/error.hpp"

namespace lfm {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

int parse_int(std::string_view text, std::string_view whole) {
    int value = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc{} || ptr != last) {
        fail(ErrorCode::ParseError, "cannot parse period '" + std::string(whole) + "'");
    }
    return value;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

void require_same_frequency(const Series& a, const Series& b) {
    if (a.frequency() != b.frequency()) {
        fail(ErrorCode::FrequencyMismatch, "series '" + a.role() + "' is " +
                                               std::string(to_string(a.frequency())) + " but '" +
                                               b.role() + "' is " +
                                               std::string(to_string(b.frequency())));
    }
}

}  // namespace

int periods_per_year(Frequency f) noexcept {
    switch (f) {
        case Frequency::Annual: return 1;
        case Frequency::Quarterly: return 4;
        case Frequency::Monthly: return 12;
    }
    return 1;
}

std::string_view to_string(Frequency f) noexcept {
    switch (f) {
        case Frequency::Annual: return "ANNUAL";
        case Frequency::Quarterly: return "QUARTERLY";
        case Frequency::Monthly: return "MONTHLY";
    }
    return "ANNUAL";
}

Frequency parse_frequency(std::string_view text) {
    if (text == "ANNUAL") return Frequency::Annual;
    if (text == "QUARTERLY") return Frequency::Quarterly;
    if (text == "MONTHLY") return Frequency::Monthly;
    fail(ErrorCode::ParseError, "unknown frequency '" + std::string(text) + "'");
}

// --- Period -----------------------------------------------------------------

Period::Period(Frequency freq, int year, int sub) : freq_(freq), year_(year), sub_(sub) {
    if (sub < 1 || sub > periods_per_year(freq)) {
        fail(ErrorCode::InvalidArgument, "sub-period " + std::to_string(sub) + " out of range for " +
                                             std::string(lfm::to_string(freq)));
    }
}

Period Period::parse(std::string_view text, Frequency freq) {
    const std::string_view s = trim(text);
    switch (freq) {
        case Frequency::Annual:
            return Period(freq, parse_int(s, text), 1);
        case Frequency::Quarterly: {
            const auto dash = s.find("-Q");
            if (dash == std::string_view::npos) break;
            const int q = parse_int(s.substr(dash + 2), text);
            if (q < 1 || q > 4) break;
            return Period(freq, parse_int(s.substr(0, dash), text), q);
        }
        case Frequency::Monthly: {
            const auto dash = s.find('-', 1);
            if (dash == std::string_view::npos) break;
            const int m = parse_int(s.substr(dash + 1), text);
            if (m < 1 || m > 12) break;
            return Period(freq, parse_int(s.substr(0, dash), text), m);
        }
    }
    fail(ErrorCode::ParseError, "cannot parse '" + std::string(text) + "' as a " +
                                    std::string(lfm::to_string(freq)) + " period");
}

Period Period::parse(std::string_view text) {
    const std::string_view s = trim(text);
    if (s.find("-Q") != std::string_view::npos) return parse(s, Frequency::Quarterly);
    if (s.find('-', 1) != std::string_view::npos) return parse(s, Frequency::Monthly);
    return parse(s, Frequency::Annual);
}

Period Period::from_ordinal(Frequency freq, std::int64_t ordinal) {
    const int p = periods_per_year(freq);
    const std::int64_t year = floor_div(ordinal, p);
    const auto sub = static_cast<int>(ordinal - year * p) + 1;
    return Period(freq, static_cast<int>(year), sub);
}

std::int64_t Period::ordinal() const noexcept {
    return static_cast<std::int64_t>(year_) * periods_per_year(freq_) + (sub_ - 1);
}

std::string Period::to_string() const {
    char buf[32];
    switch (freq_) {
        case Frequency::Annual: std::snprintf(buf, sizeof buf, "%d", year_); break;
        case Frequency::Quarterly: std::snprintf(buf, sizeof buf, "%d-Q%d", year_, sub_); break;
        case Frequency::Monthly: std::snprintf(buf, sizeof buf, "%d-%02d", year_, sub_); break;
    }
    return buf;
}

Period Period::operator+(std::int64_t n) const { return from_ordinal(freq_, ordinal() + n); }

std::int64_t Period::operator-(const Period& rhs) const {
    if (freq_ != rhs.freq_) {
        fail(ErrorCode::FrequencyMismatch, "cannot difference " + to_string() + " and " + rhs.to_string());
    }
    return ordinal() - rhs.ordinal();
}

std::strong_ordering Period::operator<=>(const Period& rhs) const {
    if (freq_ != rhs.freq_) {
        fail(ErrorCode::FrequencyMismatch, "cannot compare " + to_string() + " and " + rhs.to_string());
    }
    return ordinal() <=> rhs.ordinal();
}

// --- Unit / missing -----------------------------------------------------------

std::string_view to_string(Unit u) noexcept {
    switch (u) {
        case Unit::Persons: return "PERSONS";
        case Unit::RatePerYear: return "RATE_PER_YEAR";
        case Unit::Index: return "INDEX";
    }
    return "INDEX";
}

Unit parse_unit(std::string_view text) {
    if (text == "PERSONS") return Unit::Persons;
    if (text == "RATE_PER_YEAR") return Unit::RatePerYear;
    if (text == "INDEX") return Unit::Index;
    fail(ErrorCode::ParseError, "unknown unit '" + std::string(text) + "'");
}

bool is_missing(double v) noexcept { return std::isnan(v); }

// --- Series -----------------------------------------------------------------

Series::Series(Period start, std::vector<double> values, Unit unit, std::string role)
    : start_(start), values_(std::move(values)), unit_(unit), role_(std::move(role)) {
    if (unit_ == Unit::Persons) {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!is_missing(values_[i]) && values_[i] < 0.0) {
                fail(ErrorCode::UnitMismatch, "negative PERSONS value at " + period_at(i).to_string() +
                                                  " in '" + role_ + "'");
            }
        }
    }
}

bool Series::contains(const Period& p) const {
    if (p.frequency() != frequency() || values_.empty()) return false;
    return p >= start_ && p <= end();
}

double Series::at(const Period& p) const {
    if (!contains(p)) {
        fail(ErrorCode::CoverageGap, "series '" + role_ + "' has no value at " + p.to_string());
    }
    return values_[static_cast<std::size_t>(p - start_)];
}

bool Series::has_missing() const noexcept {
    return std::any_of(values_.begin(), values_.end(), [](double v) { return is_missing(v); });
}

Series Series::slice(const Period& from, const Period& to) const {
    if (!contains(from) || !contains(to) || to < from) {
        fail(ErrorCode::CoverageGap, "slice " + from.to_string() + ".." + to.to_string() +
                                         " is outside series '" + role_ + "'");
    }
    const auto first = static_cast<std::size_t>(from - start_);
    const auto last = static_cast<std::size_t>(to - start_);
    return Series(from, std::vector<double>(values_.begin() + first, values_.begin() + last + 1), unit_, role_);
}

Series Series::with_role(std::string role) const { return Series(start_, values_, unit_, std::move(role)); }

Series Series::with_unit(Unit unit) const { return Series(start_, values_, unit, role_); }

Series Series::relabeled(Period start) const {
    if (start.frequency() != frequency()) {
        fail(ErrorCode::FrequencyMismatch, "cannot relabel series '" + role_ + "' onto another frequency");
    }
    return Series(start, values_, unit_, role_);
}

// --- GrowthSpec -----------------------------------------------------------------

std::string_view to_string(GrowthMethod m) noexcept {
    return m == GrowthMethod::Backward ? "BACKWARD" : "YEAR_OVER_YEAR";
}

GrowthMethod parse_growth_method(std::string_view text) {
    if (text == "BACKWARD") return GrowthMethod::Backward;
    if (text == "YEAR_OVER_YEAR") return GrowthMethod::YearOverYear;
    fail(ErrorCode::ParseError, "unknown growth method '" + std::string(text) + "'");
}

void GrowthSpec::validate() const {
    if (smooth_window < 0 || smooth_window == 1) {
        fail(ErrorCode::InvalidArgument, "smooth_window must be 0 or >= 2, got " + std::to_string(smooth_window));
    }
}

GrowthSpec GrowthSpec::default_for(Frequency f) {
    return GrowthSpec{f == Frequency::Monthly ? GrowthMethod::YearOverYear : GrowthMethod::Backward, 0};
}

// --- operations -----------------------------------------------------------------

Series growth_rate(const Series& level, const GrowthSpec& spec) {
    spec.validate();
    if (level.unit() == Unit::RatePerYear) {
        fail(ErrorCode::UnitMismatch, "growth_rate expects a level series, '" + level.role() + "' is a rate");
    }
    const int p = periods_per_year(level.frequency());
    const std::size_t span = spec.method == GrowthMethod::Backward ? 1 : static_cast<std::size_t>(p);
    // Backward differences are annualized; year-over-year differences already span a year.
    const double scale = spec.method == GrowthMethod::Backward ? static_cast<double>(p) : 1.0;
    if (level.size() < span + 1) {
        fail(ErrorCode::InsufficientLength, "growth_rate needs at least " + std::to_string(span + 1) +
                                                " values, '" + level.role() + "' has " +
                                                std::to_string(level.size()));
    }
    std::vector<double> out(level.size() - span);
    for (std::size_t i = span; i < level.size(); ++i) {
        const double now = level[i];
        const double before = level[i - span];
        if (is_missing(now) || is_missing(before)) {
            fail(ErrorCode::MissingInWindow, "missing value in differencing window ending " +
                                                 level.period_at(i).to_string());
        }
        if (before == 0.0) {
            fail(ErrorCode::DivisionByZeroLevel, "zero level at " + level.period_at(i - span).to_string());
        }
        out[i - span] = scale * (now - before) / before;
    }
    Series rate(level.period_at(span), std::move(out), Unit::RatePerYear, "d" + level.role() + "/" + level.role());
    if (spec.smooth_window > 0) return moving_average(rate, spec.smooth_window);
    return rate;
}

Series moving_average(const Series& s, int window) {
    if (window < 2) fail(ErrorCode::InvalidArgument, "moving_average window must be >= 2");
    const auto w = static_cast<std::size_t>(window);
    if (w > s.size()) {
        fail(ErrorCode::WindowTooLarge, "window " + std::to_string(window) + " exceeds length " +
                                            std::to_string(s.size()) + " of '" + s.role() + "'");
    }
    if (s.has_missing()) fail(ErrorCode::MissingValue, "moving_average input '" + s.role() + "' has missing values");

    const std::size_t n_out = s.size() - w + 1;
    std::vector<double> out(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
        // Shifted summation keeps constants exact; the clamp keeps rounding inside the window range.
        const double ref = s[i];
        double acc = 0.0;
        double lo = ref;
        double hi = ref;
        for (std::size_t j = 0; j < w; ++j) {
            const double v = s[i + j];
            acc += v - ref;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        out[i] = std::clamp(ref + acc / static_cast<double>(w), lo, hi);
    }
    const std::size_t lead = (w % 2 == 1) ? (w - 1) / 2 : w - 1;
    return Series(s.period_at(lead), std::move(out), s.unit(), s.role());
}

Series cumulative(const Series& s) {
    if (s.has_missing()) fail(ErrorCode::MissingValue, "cumulative input '" + s.role() + "' has missing values");
    const double p = periods_per_year(s.frequency());
    std::vector<double> out(s.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        acc += s[i] / p;
        out[i] = acc;
    }
    return Series(s.start(), std::move(out), Unit::Index, s.role());
}

std::pair<Series, Series> align(const Series& a, const Series& b, int lag_on_b) {
    require_same_frequency(a, b);
    if (a.empty() || b.empty()) fail(ErrorCode::EmptyOverlap, "cannot align an empty series");
    const Series shifted = b.relabeled(b.start() + lag_on_b);
    const Period from = std::max(a.start(), shifted.start());
    const Period to = std::min(a.end(), shifted.end());
    if (to < from) {
        fail(ErrorCode::EmptyOverlap, "series '" + a.role() + "' and '" + b.role() + "' (lag " +
                                          std::to_string(lag_on_b) + ") do not overlap");
    }
    return {a.slice(from, to), shifted.slice(from, to)};
}

}  // namespace lfm
