#include "lfm/model.hpp"

#include <algorithm>
#include <set>

#include "lfm/error.hpp"

namespace lfm {

std::string_view to_string(RegressorKind k) noexcept {
    switch (k) {
        case RegressorKind::LfGrowth: return "LF_GROWTH";
        case RegressorKind::Unemployment: return "UNEMPLOYMENT";
        case RegressorKind::CpiInflation: return "CPI_INFLATION";
    }
    return "LF_GROWTH";
}

RegressorKind parse_regressor_kind(std::string_view text) {
    if (text == "LF_GROWTH") return RegressorKind::LfGrowth;
    if (text == "UNEMPLOYMENT") return RegressorKind::Unemployment;
    if (text == "CPI_INFLATION") return RegressorKind::CpiInflation;
    fail(ErrorCode::ParseError, "unknown regressor kind '" + std::string(text) + "'");
}

// --- Segment ------------------------------------------------------------------

bool Segment::contains(const Period& p) const {
    if (start && p < *start) return false;
    if (end && p > *end) return false;
    return true;
}

const Regressor& Segment::regressor(RegressorKind kind) const {
    for (const auto& [reg, value] : slopes) {
        if (reg.kind == kind) return reg;
    }
    fail(ErrorCode::MissingRegressor, "segment has no " + std::string(to_string(kind)) + " term");
}

double Segment::slope(RegressorKind kind) const { return slopes.at(regressor(kind)); }

// --- SegmentedModel ---------------------------------------------------------------

namespace {

std::set<RegressorKind> kinds_of(const Segment& s) {
    std::set<RegressorKind> kinds;
    for (const auto& [reg, value] : s.slopes) {
        if (!kinds.insert(reg.kind).second) {
            fail(ErrorCode::InvalidArgument, "regressor " + std::string(to_string(reg.kind)) +
                                                 " appears twice in one segment");
        }
    }
    return kinds;
}

}  // namespace

SegmentedModel::SegmentedModel(std::string target, Frequency frequency, std::vector<Segment> segments)
    : target_(std::move(target)), frequency_(frequency), segments_(std::move(segments)) {
    if (segments_.empty()) fail(ErrorCode::InvalidArgument, "model '" + target_ + "' has no segments");
    const auto reference = kinds_of(segments_.front());
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const Segment& s = segments_[i];
        if (s.slopes.empty()) fail(ErrorCode::InvalidArgument, "segment without slopes");
        if (kinds_of(s) != reference) {
            fail(ErrorCode::InvalidArgument, "segments of model '" + target_ + "' use different regressors");
        }
        for (const auto& [reg, value] : s.slopes) {
            if (reg.lag < 0) fail(ErrorCode::InvalidArgument, "negative lag");
        }
        for (const auto* bound : {&s.start, &s.end}) {
            if (*bound && bound->value().frequency() != frequency_) {
                fail(ErrorCode::FrequencyMismatch, "segment bound " + bound->value().to_string() +
                                                       " does not match model frequency");
            }
        }
        if (s.start && s.end && *s.end < *s.start) {
            fail(ErrorCode::InvalidArgument, "segment ends before it starts");
        }
        if (i > 0) {
            const Segment& prev = segments_[i - 1];
            if (!prev.end || !s.start || !(*prev.end < *s.start)) {
                fail(ErrorCode::InvalidArgument, "segments of model '" + target_ +
                                                     "' overlap or are out of order");
            }
        }
    }
}

std::vector<RegressorKind> SegmentedModel::regressor_kinds() const {
    const auto kinds = kinds_of(segments_.front());
    return {kinds.begin(), kinds.end()};
}

std::optional<std::size_t> SegmentedModel::segment_index(const Period& p) const {
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (segments_[i].contains(p)) return i;
    }
    return std::nullopt;
}

SegmentedModel SegmentedModel::extended_forward() const {
    auto segments = segments_;
    segments.back().end.reset();
    return SegmentedModel(target_, frequency_, std::move(segments));
}

// --- evaluation ---------------------------------------------------------------------

Series evaluate(const SegmentedModel& model, const InputMap& inputs) {
    for (const RegressorKind kind : model.regressor_kinds()) {
        const auto it = inputs.find(kind);
        if (it == inputs.end()) {
            fail(ErrorCode::MissingRegressor, "no input series for " + std::string(to_string(kind)));
        }
        if (it->second.frequency() != model.frequency()) {
            fail(ErrorCode::FrequencyMismatch, "input for " + std::string(to_string(kind)) + " is " +
                                                   std::string(to_string(it->second.frequency())) +
                                                   ", model is " + std::string(to_string(model.frequency())));
        }
        if (it->second.empty()) fail(ErrorCode::CoverageGap, "empty input for " + std::string(to_string(kind)));
    }

    std::vector<std::pair<Period, double>> produced;
    for (const Segment& seg : model.segments()) {
        // Periods where every lagged input of this segment exists.
        std::optional<Period> lo;
        std::optional<Period> hi;
        for (const auto& [reg, slope] : seg.slopes) {
            const Series& in = inputs.at(reg.kind);
            const Period first = in.start() + reg.lag;
            const Period last = in.end() + reg.lag;
            lo = lo ? std::max(*lo, first) : first;
            hi = hi ? std::min(*hi, last) : last;
        }
        if (*hi < *lo) fail(ErrorCode::CoverageGap, "lagged inputs of model '" + model.target() + "' do not overlap");
        if (seg.start && *seg.start > *lo) lo = *seg.start;
        if (seg.end && *seg.end < *hi) hi = *seg.end;
        if (*hi < *lo) continue;

        for (Period t = *lo; t <= *hi; t = t + 1) {
            double value = seg.intercept;
            for (const auto& [reg, slope] : seg.slopes) {
                const double x = inputs.at(reg.kind).at(t - reg.lag);
                if (is_missing(x)) {
                    fail(ErrorCode::CoverageGap, std::string(to_string(reg.kind)) + " is missing at " +
                                                     (t - reg.lag).to_string());
                }
                value += slope * x;
            }
            produced.emplace_back(t, value);
        }
    }
    if (produced.empty()) {
        fail(ErrorCode::CoverageGap, "no segment of model '" + model.target() + "' overlaps the inputs");
    }

    const Period first = produced.front().first;
    const auto length = static_cast<std::size_t>(produced.back().first - first) + 1;
    std::vector<double> values(length, kMissing);
    for (const auto& [t, v] : produced) values[static_cast<std::size_t>(t - first)] = v;
    return Series(first, std::move(values), Unit::RatePerYear, model.target());
}

Series forecast(const SegmentedModel& model, const InputMap& projections, int horizon) {
    if (horizon < 0) fail(ErrorCode::InvalidArgument, "negative forecast horizon");
    if (horizon == 0) {
        const Period origin = projections.empty() ? Period(model.frequency(), 0) : projections.begin()->second.start();
        return Series(origin, {}, Unit::RatePerYear, model.target());
    }
    const Series path = evaluate(model.extended_forward(), projections);
    if (path.size() < static_cast<std::size_t>(horizon)) {
        fail(ErrorCode::CoverageGap, "projections cover " + std::to_string(path.size()) +
                                         " periods, horizon is " + std::to_string(horizon));
    }
    return path.slice(path.start(), path.start() + (horizon - 1));
}

// --- presets -------------------------------------------------------------------------

namespace {

Segment segment(std::optional<Period> start, std::optional<Period> end, std::map<Regressor, double> slopes,
                double intercept) {
    return Segment{start, end, std::move(slopes), intercept};
}

}  // namespace

std::map<std::string, SegmentedModel> australian_presets() {
    using RK = RegressorKind;
    constexpr auto A = Frequency::Annual;
    constexpr auto Q = Frequency::Quarterly;
    constexpr auto M = Frequency::Monthly;
    const Regressor lf{RK::LfGrowth, 0};
    const Regressor ue{RK::Unemployment, 0};
    const Regressor cpi{RK::CpiInflation, 0};

    std::map<std::string, SegmentedModel> presets;
    presets.emplace("phillips-annual",
                    SegmentedModel("UE", A,
                                   {segment(std::nullopt, Period(A, 1994), {{cpi, -0.47}}, 0.112),
                                    segment(Period(A, 1995), std::nullopt, {{cpi, -1.5}}, 0.105)}));
    presets.emplace("ue-annual",
                    SegmentedModel("UE", A,
                                   {segment(std::nullopt, Period(A, 1994), {{lf, -2.1}}, 0.13),
                                    segment(Period(A, 1995), std::nullopt, {{lf, -2.1}}, 0.098)}));
    presets.emplace("ue-monthly",
                    SegmentedModel("UE", M,
                                   {segment(std::nullopt, Period(M, 1994, 12), {{lf, -1.77}}, 0.124),
                                    segment(Period(M, 1995, 1), std::nullopt, {{lf, -2.1}}, 0.0977)}));
    presets.emplace("dgdp-annual",
                    SegmentedModel("DGDP", A,
                                   {segment(std::nullopt, Period(A, 1984), {{lf, 7.8}}, -0.024),
                                    segment(Period(A, 1985), std::nullopt, {{lf, 4.2}}, -0.042)}));
    presets.emplace("dgdp-quarterly",
                    SegmentedModel("DGDP", Q,
                                   {segment(std::nullopt, Period(Q, 1984, 4), {{lf, 6.5}}, -0.021),
                                    segment(Period(Q, 1985, 1), std::nullopt, {{lf, 3.3}}, -0.026)}));
    // 1995 falls in the middle segment: "1984 < t < 1996" and "t > 1995".
    presets.emplace("cpi-generalized",
                    SegmentedModel("CPI", A,
                                   {segment(std::nullopt, Period(A, 1984), {{lf, 8.3}, {ue, 0.97}}, -0.1),
                                    segment(Period(A, 1985), Period(A, 1995), {{lf, 3.9}, {ue, 0.97}}, -0.1),
                                    segment(Period(A, 1996), std::nullopt, {{lf, 3.9}, {ue, 0.88}}, -0.1)}));
    return presets;
}

SegmentedModel preset(const std::string& name) {
    auto presets = australian_presets();
    const auto it = presets.find(name);
    if (it == presets.end()) fail(ErrorCode::UnknownPreset, "unknown preset '" + name + "'");
    return it->second;
}

// --- JSON ------------------------------------------------------------------------------

void to_json(nlohmann::json& j, const SegmentedModel& model) {
    j = nlohmann::json::object();
    j["target"] = model.target();
    j["frequency"] = std::string(to_string(model.frequency()));
    auto segments = nlohmann::json::array();
    for (const Segment& s : model.segments()) {
        nlohmann::json js;
        js["start"] = s.start ? nlohmann::json(s.start->to_string()) : nlohmann::json(nullptr);
        js["end"] = s.end ? nlohmann::json(s.end->to_string()) : nlohmann::json(nullptr);
        js["intercept"] = s.intercept;
        auto slopes = nlohmann::json::array();
        for (const auto& [reg, value] : s.slopes) {
            slopes.push_back({{"kind", std::string(to_string(reg.kind))}, {"lag", reg.lag}, {"value", value}});
        }
        js["slopes"] = std::move(slopes);
        segments.push_back(std::move(js));
    }
    j["segments"] = std::move(segments);
}

SegmentedModel model_from_json(const nlohmann::json& j) {
    try {
        const Frequency freq = parse_frequency(j.at("frequency").get<std::string>());
        std::vector<Segment> segments;
        for (const auto& js : j.at("segments")) {
            Segment s;
            if (!js.at("start").is_null()) s.start = Period::parse(js.at("start").get<std::string>(), freq);
            if (!js.at("end").is_null()) s.end = Period::parse(js.at("end").get<std::string>(), freq);
            s.intercept = js.at("intercept").get<double>();
            for (const auto& jr : js.at("slopes")) {
                const Regressor reg{parse_regressor_kind(jr.at("kind").get<std::string>()), jr.at("lag").get<int>()};
                s.slopes.emplace(reg, jr.at("value").get<double>());
            }
            segments.push_back(std::move(s));
        }
        return SegmentedModel(j.at("target").get<std::string>(), freq, std::move(segments));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, std::string("malformed model document: ") + e.what());
    }
}

}  // namespace lfm
