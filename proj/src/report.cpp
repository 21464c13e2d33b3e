#include "lfm/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <set>

#include "lfm/error.hpp"
#include "lfm/model.hpp"

namespace fs = std::filesystem;

namespace lfm {

std::string_view to_string(Command c) noexcept {
    switch (c) {
        case Command::Validate: return "validate";
        case Command::Fit: return "fit";
        case Command::Predict: return "predict";
        case Command::Diagnose: return "diagnose";
        case Command::Forecast: return "forecast";
        case Command::Report: return "report";
        case Command::Synthesize: return "synthesize";
    }
    return "report";
}

Command parse_command(std::string_view text) {
    for (const auto c : {Command::Validate, Command::Fit, Command::Predict, Command::Diagnose, Command::Forecast,
                         Command::Report, Command::Synthesize}) {
        if (to_string(c) == text) return c;
    }
    fail(ErrorCode::InvalidArgument, "unknown command '" + std::string(text) + "'");
}

// --- run configuration ----------------------------------------------------------------------

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.fit = fit_config_from_json(j);
    cfg.has_slope_grid = j.contains("slope_grid");
    try {
        cfg.target = j.value("target", std::string());
        if (j.contains("frequency") && !j.at("frequency").is_null()) {
            cfg.frequency = parse_frequency(j.at("frequency").get<std::string>());
        }
        if (j.contains("growth") && !j.at("growth").is_null()) {
            const auto& g = j.at("growth");
            GrowthSpec spec;
            if (g.contains("method")) spec.method = parse_growth_method(g.at("method").get<std::string>());
            spec.smooth_window = g.value("smooth_window", 0);
            spec.validate();
            cfg.growth = spec;
        }
        if (j.contains("diagnostics")) {
            const auto& d = j.at("diagnostics");
            auto& out = cfg.diagnostics;
            out.adf_lags = d.value("adf_lags", out.adf_lags);
            if (d.contains("adf_deterministic")) {
                out.adf_deterministic = parse_deterministic(d.at("adf_deterministic").get<std::string>());
            }
            if (d.contains("dfgls_lags")) out.dfgls_lags = d.at("dfgls_lags").get<std::vector<int>>();
            out.pp_bandwidth = d.value("pp_bandwidth", out.pp_bandwidth);
            out.eg_lags = d.value("eg_lags", out.eg_lags);
            out.johansen_lags = d.value("johansen_lags", out.johansen_lags);
            if (d.contains("johansen_trend")) {
                out.johansen_trend = parse_johansen_trend(d.at("johansen_trend").get<std::string>());
            }
            if (d.contains("level")) out.level = parse_level(d.at("level").get<std::string>());
        }
        cfg.horizon = j.value("horizon", 0);
        if (cfg.horizon < 0) fail(ErrorCode::InvalidConfig, "horizon must be >= 0");
        if (j.contains("from") && !j.at("from").is_null()) cfg.from = j.at("from").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidConfig, std::string("malformed run config: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidConfig) throw;
        fail(ErrorCode::InvalidConfig, std::string("malformed run config: ") + e.what());
    }
    return cfg;
}

void to_json(nlohmann::json& j, const RunConfig& cfg) {
    j = cfg.fit;
    j["target"] = cfg.target;
    j["frequency"] = cfg.frequency ? nlohmann::json(std::string(to_string(*cfg.frequency))) : nlohmann::json(nullptr);
    if (cfg.growth) {
        j["growth"] = {{"method", std::string(to_string(cfg.growth->method))},
                       {"smooth_window", cfg.growth->smooth_window}};
    } else {
        j["growth"] = nullptr;
    }
    const auto& d = cfg.diagnostics;
    j["diagnostics"] = {{"adf_lags", d.adf_lags},
                        {"adf_deterministic", std::string(to_string(d.adf_deterministic))},
                        {"dfgls_lags", d.dfgls_lags},
                        {"pp_bandwidth", d.pp_bandwidth},
                        {"eg_lags", d.eg_lags},
                        {"johansen_lags", d.johansen_lags},
                        {"johansen_trend", std::string(to_string(d.johansen_trend))},
                        {"level", std::string(to_string(d.level))}};
    j["horizon"] = cfg.horizon;
    j["from"] = cfg.from ? nlohmann::json(*cfg.from) : nlohmann::json(nullptr);
}

// --- SVG --------------------------------------------------------------------------------

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& y_label, const std::vector<ChartLine>& lines) {
    constexpr double kW = 800, kH = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
    static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

    std::int64_t x0 = 0, x1 = 0;
    double y0 = 0, y1 = 0;
    bool any_x = false, any_y = false;
    Frequency freq = Frequency::Annual;
    for (const auto& l : lines) {
        if (l.series.empty()) continue;
        freq = l.series.frequency();
        const auto a = l.series.start().ordinal();
        const auto b = l.series.end().ordinal();
        x0 = any_x ? std::min(x0, a) : a;
        x1 = any_x ? std::max(x1, b) : b;
        any_x = true;
        for (const double v : l.series.values()) {
            if (is_missing(v)) continue;
            y0 = any_y ? std::min(y0, v) : v;
            y1 = any_y ? std::max(y1, v) : v;
            any_y = true;
        }
    }
    if (x1 == x0) x1 = x0 + 1;
    if (!(y1 > y0)) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const double pw = kW - kLeft - kRight;
    const double ph = kH - kTop - kBottom;
    auto sx = [&](std::int64_t ord) { return kLeft + pw * static_cast<double>(ord - x0) / static_cast<double>(x1 - x0); };
    auto sy = [&](double v) { return kTop + ph * (1.0 - (v - y0) / (y1 - y0)); };

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<!-- lfm " LFM_VERSION " -->\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"420\" viewBox=\"0 0 800 420\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"800\" height=\"420\" fill=\"white\"/>\n";
    s += "<text x=\"400\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + xml_escape(title) + "</text>\n";
    s += "<g stroke=\"#444\" stroke-width=\"1\">\n";
    s += "<line x1=\"" + fmt("%.1f", kLeft) + "\" y1=\"" + fmt("%.1f", kTop + ph) + "\" x2=\"" +
         fmt("%.1f", kLeft + pw) + "\" y2=\"" + fmt("%.1f", kTop + ph) + "\"/>\n";
    s += "<line x1=\"" + fmt("%.1f", kLeft) + "\" y1=\"" + fmt("%.1f", kTop) + "\" x2=\"" + fmt("%.1f", kLeft) +
         "\" y2=\"" + fmt("%.1f", kTop + ph) + "\"/>\n";
    s += "</g>\n";

    for (int i = 0; i <= 5; ++i) {
        const double v = y0 + (y1 - y0) * i / 5.0;
        const double y = sy(v);
        s += "<line x1=\"" + fmt("%.1f", kLeft - 4) + "\" y1=\"" + fmt("%.1f", y) + "\" x2=\"" + fmt("%.1f", kLeft) +
             "\" y2=\"" + fmt("%.1f", y) + "\" stroke=\"#444\"/>\n";
        s += "<text x=\"" + fmt("%.1f", kLeft - 6) + "\" y=\"" + fmt("%.1f", y + 4) + "\" text-anchor=\"end\">" +
             fmt("%.3g", v) + "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const auto ord = x0 + (x1 - x0) * i / 5;
        const double x = sx(ord);
        s += "<line x1=\"" + fmt("%.1f", x) + "\" y1=\"" + fmt("%.1f", kTop + ph) + "\" x2=\"" + fmt("%.1f", x) +
             "\" y2=\"" + fmt("%.1f", kTop + ph + 4) + "\" stroke=\"#444\"/>\n";
        s += "<text x=\"" + fmt("%.1f", x) + "\" y=\"" + fmt("%.1f", kTop + ph + 18) + "\" text-anchor=\"middle\">" +
             Period::from_ordinal(freq, ord).to_string() + "</text>\n";
    }
    s += "<text x=\"16\" y=\"" + fmt("%.1f", kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fmt("%.1f", kTop + ph / 2) + ")\">" + xml_escape(y_label) + "</text>\n";

    for (std::size_t li = 0; li < lines.size(); ++li) {
        const auto& l = lines[li];
        const char* color = kColors[li % 4];
        std::string pts;
        auto flush = [&] {
            if (!pts.empty()) {
                s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" +
                     pts + "\"/>\n";
            }
            pts.clear();
        };
        for (std::size_t i = 0; i < l.series.size(); ++i) {
            const double v = l.series[i];
            if (is_missing(v)) {
                flush();
                continue;
            }
            if (!pts.empty()) pts += ' ';
            pts += fmt("%.2f", sx(l.series.period_at(i).ordinal())) + "," + fmt("%.2f", sy(v));
        }
        flush();
        const double ly = kTop + 14 + 16 * static_cast<double>(li);
        s += "<line x1=\"" + fmt("%.1f", kLeft + pw - 150) + "\" y1=\"" + fmt("%.1f", ly - 4) + "\" x2=\"" +
             fmt("%.1f", kLeft + pw - 130) + "\" y2=\"" + fmt("%.1f", ly - 4) + "\" stroke=\"" + color +
             "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + fmt("%.1f", kLeft + pw - 124) + "\" y=\"" + fmt("%.1f", ly) + "\">" + xml_escape(l.label) +
             "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

// --- helpers ----------------------------------------------------------------------------

namespace {

std::string role_of(RegressorKind k) {
    switch (k) {
        case RegressorKind::LfGrowth: return "LF";
        case RegressorKind::Unemployment: return "UE";
        case RegressorKind::CpiInflation: return "CPI";
    }
    return "LF";
}

void write_text(const fs::path& path, const std::string& text) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::string num(double v) {
    if (is_missing(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Drops leading and trailing missing values.
Series trim_missing(const Series& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && is_missing(s[a])) ++a;
    while (b > a && is_missing(s[b - 1])) --b;
    if (a == b) fail(ErrorCode::EmptyResult, "series " + s.role() + " has no observations");
    return s.slice(s.period_at(a), s.period_at(b - 1));
}

nlohmann::json error_json(const Error& e) {
    return {{"code", std::string(error_name(e.code()))}, {"message", e.what()}};
}

template <class F>
nlohmann::json guarded(F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        return {{"error", error_json(e)}};
    }
}

struct Resolved {
    std::string target;
    Frequency frequency = Frequency::Annual;
    GrowthSpec growth;
    std::optional<SegmentedModel> model;  ///< from --model or --preset
    FitConfig fit;
    std::optional<Period> from;
};

class Runner {
public:
    Runner(const RunSpec& spec, std::ostream& out) : spec_(spec), out_(out), dir_(spec.out_dir) {}

    void execute();

private:
    void load_inputs();
    void resolve();
    nlohmann::json meta() const;
    std::string csv_comment() const;
    void add_input(const std::string& path, const std::string& text);

    Series observed() const;
    InputMap inputs(const std::vector<RegressorKind>& kinds) const;
    Series clip(const Series& s) const { return res_.from ? clip_reliable(s, *res_.from) : s; }

    FitResult do_fit(const std::optional<Period>& until) const;
    void cmd_validate();
    FitResult cmd_fit();
    void cmd_predict(const std::optional<SegmentedModel>& fitted);
    void cmd_diagnose(const FitResult& fit);
    void cmd_forecast();
    void write_curves(const FitResult& fit);
    void write_charts(const FitResult& fit);

    const RunSpec& spec_;
    std::ostream& out_;
    fs::path dir_;
    RunConfig cfg_;
    std::optional<Dataset> data_;
    nlohmann::json inputs_ = nlohmann::json::array();
    Resolved res_;
    std::optional<Series> forecast_;
    std::optional<Series> forecast_observed_;
};

void Runner::add_input(const std::string& path, const std::string& text) {
    inputs_.push_back({{"path", path}, {"sha256", sha256_hex(text)}});
}

nlohmann::json Runner::meta() const {
    return {{"tool", "lfm"},
            {"version", LFM_VERSION},
            {"command", std::string(to_string(spec_.command))},
            {"seed", spec_.seed},
            {"critical_table", std::string(critical_table_version())},
            {"inputs", inputs_}};
}

std::string Runner::csv_comment() const {
    std::string s = "# lfm " LFM_VERSION " " + std::string(to_string(spec_.command));
    for (const auto& i : inputs_) s += " " + i.at("path").get<std::string>() + "=" + i.at("sha256").get<std::string>();
    return s + "\n";
}

void Runner::load_inputs() {
    if (!spec_.config.empty()) {
        const std::string text = read_file(spec_.config);
        add_input(spec_.config, text);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::InvalidConfig, spec_.config + ": " + e.what());
        }
        cfg_ = run_config_from_json(j);
    }
    if (!spec_.manifest.empty()) {
        const std::string text = read_file(spec_.manifest);
        add_input(spec_.manifest, text);
        const DataManifest m = load_manifest(spec_.manifest);
        data_ = load(m);
        for (const auto& p : data_->provenance) inputs_.push_back({{"path", p.path}, {"sha256", p.sha256}});
    }
    if (!spec_.model.empty()) {
        const std::string text = read_file(spec_.model);
        add_input(spec_.model, text);
        try {
            res_.model = model_from_json(nlohmann::json::parse(text));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::ParseError, spec_.model + ": " + e.what());
        }
    } else if (!spec_.preset.empty()) {
        res_.model = preset(spec_.preset);
    }
}

void Runner::resolve() {
    res_.target = !spec_.target.empty()  ? spec_.target
                  : !cfg_.target.empty() ? cfg_.target
                  : res_.model           ? res_.model->target()
                                         : "UE";
    if (cfg_.frequency) {
        res_.frequency = *cfg_.frequency;
    } else if (res_.model) {
        res_.frequency = res_.model->frequency();
    } else {
        std::vector<Frequency> found;
        if (data_) {
            for (const auto& [key, s] : data_->series) {
                if (key.first == res_.target) found.push_back(key.second);
            }
        }
        if (found.size() != 1) {
            fail(ErrorCode::InvalidConfig, "cannot infer the model frequency for target " + res_.target +
                                               "; set \"frequency\" in the config");
        }
        res_.frequency = found.front();
    }
    res_.growth = cfg_.growth ? *cfg_.growth : GrowthSpec::default_for(res_.frequency);

    FitConfig fit = cfg_.fit;
    std::vector<RegressorKind> kinds;
    if (cfg_.has_slope_grid) {
        kinds = fit.kinds();
    } else {
        kinds = res_.model ? res_.model->regressor_kinds() : std::vector<RegressorKind>{RegressorKind::LfGrowth};
        const FitConfig defaults = FitConfig::defaults(kinds);
        fit.slope_grid = defaults.slope_grid;
    }
    if (fit.lag_grid.empty()) {
        for (const auto k : kinds) fit.lag_grid[k] = {0, 1, 2, 3};
    }
    if (!spec_.breaks.empty()) {
        fit.breaks.clear();
        for (const auto& b : spec_.breaks) fit.breaks.push_back(Period::parse(b, res_.frequency));
    } else if (fit.breaks.empty() && res_.model) {
        for (std::size_t i = 1; i < res_.model->segments().size(); ++i) {
            if (const auto& s = res_.model->segments()[i].start) fit.breaks.push_back(*s);
        }
    }
    res_.fit = fit;
    const std::string from = !spec_.from.empty() ? spec_.from : cfg_.from.value_or("");
    if (!from.empty()) res_.from = Period::parse(from, res_.frequency);
}

Series Runner::observed() const {
    if (!data_) fail(ErrorCode::InvalidConfig, "this command needs --manifest");
    Series s = trim_missing(data_->get(res_.target, res_.frequency));
    if (s.unit() != Unit::RatePerYear) {
        // Level series (e.g. a price index) become rates; the target is never smoothed.
        s = growth_rate(s, GrowthSpec{res_.growth.method, 0}).with_role(res_.target);
    }
    return clip(s);
}

InputMap Runner::inputs(const std::vector<RegressorKind>& kinds) const {
    if (!data_) fail(ErrorCode::InvalidConfig, "this command needs --manifest");
    InputMap in;
    for (const auto k : kinds) {
        const std::string role = role_of(k);
        if (!data_->has(role, res_.frequency)) {
            fail(ErrorCode::MissingRegressor, "no " + role + " series at " + std::string(to_string(res_.frequency)) +
                                                  " frequency for regressor " + std::string(to_string(k)));
        }
        Series s = trim_missing(data_->get(role, res_.frequency));
        if (s.unit() != Unit::RatePerYear) {
            const GrowthSpec g = k == RegressorKind::LfGrowth ? res_.growth : GrowthSpec{res_.growth.method, 0};
            s = growth_rate(s, g);
        } else if (k == RegressorKind::LfGrowth && res_.growth.smooth_window > 0) {
            s = moving_average(s, res_.growth.smooth_window);
        }
        in.emplace(k, clip(s));
    }
    return in;
}

FitResult Runner::do_fit(const std::optional<Period>& until) const {
    Series obs = observed();
    if (until) {
        if (*until < obs.start()) fail(ErrorCode::EmptyResult, "forecast origin precedes the observations");
        if (*until < obs.end()) obs = obs.slice(obs.start(), *until);
    }
    return fit_cumulative(obs, inputs(res_.fit.kinds()), res_.fit);
}

void Runner::cmd_validate() {
    if (!data_) fail(ErrorCode::InvalidConfig, "validate needs --manifest");
    nlohmann::json j;
    j["meta"] = meta();
    j["country"] = data_->country;
    auto series = nlohmann::json::array();
    for (const auto& [key, s] : data_->series) {
        std::size_t missing = 0;
        double lo = 0, hi = 0;
        bool any = false;
        for (const double v : s.values()) {
            if (is_missing(v)) {
                ++missing;
                continue;
            }
            lo = any ? std::min(lo, v) : v;
            hi = any ? std::max(hi, v) : v;
            any = true;
        }
        series.push_back({{"role", key.first},
                          {"frequency", std::string(to_string(key.second))},
                          {"unit", std::string(to_string(s.unit()))},
                          {"start", s.start().to_string()},
                          {"end", s.end().to_string()},
                          {"length", s.size()},
                          {"missing", missing},
                          {"min", any ? nlohmann::json(lo) : nlohmann::json(nullptr)},
                          {"max", any ? nlohmann::json(hi) : nlohmann::json(nullptr)}});
        out_ << key.first << " " << to_string(key.second) << " " << s.start().to_string() << ".." << s.end().to_string()
             << " (" << s.size() << " values, " << missing << " missing)\n";
    }
    j["series"] = std::move(series);
    auto breaks = nlohmann::json::array();
    for (const auto& b : data_->known_breaks) {
        breaks.push_back({{"period", b.period.to_string()}, {"note", b.note}});
        out_ << "known break " << b.period.to_string() << ": " << b.note << "\n";
    }
    j["known_breaks"] = std::move(breaks);
    write_text(dir_ / "validate.json", dump(j));
}

FitResult Runner::cmd_fit() {
    const FitResult fit = do_fit(std::nullopt);
    nlohmann::json j;
    j["meta"] = meta();
    j["target"] = res_.target;
    j["frequency"] = std::string(to_string(res_.frequency));
    j["growth"] = {{"method", std::string(to_string(res_.growth.method))}, {"smooth_window", res_.growth.smooth_window}};
    j["config"] = res_.fit;
    j["fit"] = fit;
    const auto kinds = res_.fit.kinds();
    if (kinds.size() == 1) {
        // Plain least squares on the same range, for comparison with the cumulative fit.
        const int lag = fit.model.segments().front().regressor(kinds.front()).lag;
        j["ols"] = guarded([&] {
            const OlsFit o = fit_ols(fit.observed, inputs(kinds).at(kinds.front()), lag);
            return nlohmann::json{{"slope", o.slope}, {"intercept", o.intercept}, {"r2", o.r2}, {"lag", lag}};
        });
    }
    auto breaks = nlohmann::json::array();
    if (data_) {
        for (const auto& b : data_->known_breaks) breaks.push_back({{"period", b.period.to_string()}, {"note", b.note}});
    }
    j["known_breaks"] = std::move(breaks);
    write_text(dir_ / "fit.json", dump(j));

    nlohmann::json m = fit.model;
    m["meta"] = meta();
    write_text(dir_ / "model.json", dump(m));
    write_curves(fit);
    out_ << "fit " << res_.target << " " << to_string(res_.frequency) << ": objective " << num(fit.objective_value)
         << ", r2_dynamic " << num(fit.r2_dynamic) << ", r2_cumulative " << num(fit.r2_cumulative) << "\n";
    for (const auto& s : fit.model.segments()) {
        out_ << "  [" << (s.start ? s.start->to_string() : "-") << ", " << (s.end ? s.end->to_string() : "-") << "]";
        for (const auto& [reg, v] : s.slopes) out_ << " " << to_string(reg.kind) << "(lag " << reg.lag << ") " << num(v);
        out_ << " intercept " << num(s.intercept) << "\n";
    }
    return fit;
}

void Runner::write_curves(const FitResult& fit) {
    const Series co = cumulative(fit.observed);
    const Series cp = cumulative(fit.predicted);
    std::string csv = csv_comment();
    csv += "period,observed,predicted,cum_observed,cum_predicted,residual\n";
    for (std::size_t i = 0; i < fit.observed.size(); ++i) {
        csv += fit.observed.period_at(i).to_string() + "," + num(fit.observed[i]) + "," + num(fit.predicted[i]) + "," +
               num(co[i]) + "," + num(cp[i]) + "," + num(fit.residual[i]) + "\n";
    }
    write_text(dir_ / "curves.csv", csv);
}

void Runner::write_charts(const FitResult& fit) {
    // Input digests go in a comment right after the version comment.
    std::string inputs = "<!-- inputs:";
    for (const auto& i : inputs_) inputs += " " + i.at("path").get<std::string>() + "=" + i.at("sha256").get<std::string>();
    inputs += " -->\n";
    const auto chart = [&](const std::string& title, const std::string& y_label, const std::vector<ChartLine>& lines) {
        std::string svg = svg_line_chart(title, y_label, lines);
        const auto pos = svg.find("-->\n");
        return svg.insert(pos == std::string::npos ? 0 : pos + 4, inputs);
    };
    const std::string t = res_.target;
    write_text(dir_ / "charts" / "dynamic.svg", chart(t + ": observed and predicted", "rate per year",
                                                     {{"observed", fit.observed}, {"predicted", fit.predicted}}));
    write_text(dir_ / "charts" / "cumulative.svg",
               chart(t + ": cumulative curves", "cumulative",
                     {{"observed", cumulative(fit.observed)}, {"predicted", cumulative(fit.predicted)}}));
    if (forecast_ && !forecast_->empty()) {
        std::vector<ChartLine> lines{{"forecast", *forecast_}};
        if (forecast_observed_) lines.insert(lines.begin(), ChartLine{"observed", *forecast_observed_});
        write_text(dir_ / "charts" / "forecast.svg", chart(t + ": forecast", "rate per year", lines));
    }
}

void Runner::cmd_predict(const std::optional<SegmentedModel>& fitted) {
    const SegmentedModel model = res_.model ? *res_.model : fitted ? *fitted : do_fit(std::nullopt).model;
    const Series pred = evaluate(model, inputs(model.regressor_kinds()));
    std::optional<Series> obs;
    if (data_ && data_->has(res_.target, res_.frequency)) obs = observed();

    std::string csv = csv_comment();
    csv += "period,predicted,observed\n";
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const Period p = pred.period_at(i);
        const double o = obs && obs->contains(p) ? obs->at(p) : kMissing;
        csv += p.to_string() + "," + num(pred[i]) + "," + num(o) + "\n";
    }
    write_text(dir_ / "predict.csv", csv);

    nlohmann::json j;
    j["meta"] = meta();
    j["model"] = model;
    j["predicted"] = pred;
    if (obs) {
        j["goodness"] = guarded([&] {
            const Goodness g = goodness(*obs, pred);
            return nlohmann::json{{"r2_dynamic", g.r2_dynamic}, {"r2_cumulative", g.r2_cumulative}};
        });
    }
    write_text(dir_ / "predict.json", dump(j));
    out_ << "predicted " << pred.size() << " periods " << pred.start().to_string() << ".." << pred.end().to_string()
         << "\n";
}

void Runner::cmd_diagnose(const FitResult& fit) {
    const auto& d = cfg_.diagnostics;
    const Series& resid = fit.residual;
    nlohmann::json j;
    j["meta"] = meta();
    j["target"] = res_.target;
    j["residual"] = {{"start", resid.start().to_string()}, {"end", resid.end().to_string()}, {"length", resid.size()}};
    nlohmann::json ur;
    ur["adf"] = guarded([&] { return nlohmann::json(adf_test(resid, d.adf_lags, d.adf_deterministic)); });
    ur["pp"] = guarded([&] { return nlohmann::json(pp_test(resid, d.pp_bandwidth)); });
    auto gls = nlohmann::json::array();
    for (const int lag : d.dfgls_lags) gls.push_back(guarded([&] { return nlohmann::json(dfgls_test(resid, lag)); }));
    ur["dfgls"] = std::move(gls);
    j["unit_root"] = std::move(ur);
    j["cointegration"] = {
        {"engle_granger",
         guarded([&] { return nlohmann::json(engle_granger(fit.observed, fit.predicted, d.eg_lags, d.level)); })},
        {"johansen", guarded([&] {
             return nlohmann::json(johansen_test({fit.observed, fit.predicted}, d.johansen_lags, d.johansen_trend, d.level));
         })}};
    write_text(dir_ / "diagnostics.json", dump(j));

    const auto& a = j["unit_root"]["adf"];
    if (a.contains("stat_t")) {
        out_ << "ADF on residual: t = " << num(a["stat_t"].get<double>()) << " (1% critical "
             << num(a["critical"]["1%"].get<double>()) << ")\n";
    }
    const auto& jo = j["cointegration"]["johansen"];
    if (jo.contains("johansen")) out_ << "Johansen rank: " << jo["johansen"]["rank"].get<int>() << "\n";
}

void Runner::cmd_forecast() {
    const int p = periods_per_year(res_.frequency);
    const int horizon = spec_.horizon ? *spec_.horizon : cfg_.horizon > 0 ? cfg_.horizon : 2 * p;
    if (horizon < 0) fail(ErrorCode::InvalidArgument, "horizon must be >= 0");

    std::optional<Series> obs;
    if (data_ && data_->has(res_.target, res_.frequency)) obs = observed();
    Period origin = Period(res_.frequency, 2000, 1);
    if (!spec_.origin.empty()) {
        origin = Period::parse(spec_.origin, res_.frequency);
    } else if (obs) {
        // Default: hold out the last `horizon` observations.
        origin = obs->end() - horizon;
    } else {
        fail(ErrorCode::InvalidConfig, "forecast needs --origin when the target series is absent");
    }
    const SegmentedModel model = res_.model ? *res_.model : do_fit(origin).model;

    const auto kinds = model.regressor_kinds();
    InputMap all = inputs(kinds);
    InputMap proj;
    for (const auto k : kinds) {
        int max_lag = 0;
        for (const auto& s : model.segments()) max_lag = std::max(max_lag, s.regressor(k).lag);
        const Series& s = all.at(k);
        const Period want = origin + 1 - max_lag;
        if (s.end() < want) fail(ErrorCode::CoverageGap, "projection for " + role_of(k) + " ends before the horizon");
        proj.emplace(k, s.slice(std::max(want, s.start()), s.end()));
    }
    Series fc = horizon == 0 ? Series(origin + 1, {}, Unit::RatePerYear, res_.target) : forecast(model, proj, horizon);
    if (!fc.empty() && fc.start() != origin + 1) {
        fail(ErrorCode::CoverageGap, "projections do not start right after the origin " + origin.to_string());
    }

    std::optional<double> score;
    std::size_t overlap = 0;
    if (obs && !fc.empty()) {
        for (std::size_t i = 0; i < fc.size(); ++i) {
            const Period q = fc.period_at(i);
            if (obs->contains(q) && !is_missing(obs->at(q))) ++overlap;
        }
        if (overlap > 0) score = rmsfe(*obs, fc, horizon);
    }

    std::string csv = csv_comment();
    csv += "period,forecast,observed\n";
    for (std::size_t i = 0; i < fc.size(); ++i) {
        const Period q = fc.period_at(i);
        const double o = obs && obs->contains(q) ? obs->at(q) : kMissing;
        csv += q.to_string() + "," + num(fc[i]) + "," + num(o) + "\n";
    }
    write_text(dir_ / "forecast.csv", csv);

    nlohmann::json j;
    j["meta"] = meta();
    j["origin"] = origin.to_string();
    j["horizon"] = horizon;
    j["model"] = model;
    j["forecast"] = fc;
    j["rmsfe"] = score ? nlohmann::json(*score) : nlohmann::json(nullptr);
    j["overlap"] = overlap;
    write_text(dir_ / "forecast.json", dump(j));
    out_ << "forecast " << horizon << " periods after " << origin.to_string();
    if (score) out_ << ", RMSFE " << num(*score) << " over " << overlap << " observations";
    out_ << "\n";

    forecast_ = fc;
    if (obs) {
        const Period a = std::max(obs->start(), origin + 1 - 4 * horizon);
        if (a <= obs->end()) forecast_observed_ = obs->slice(a, obs->end());
    }
}

void Runner::execute() {
    load_inputs();
    resolve();
    switch (spec_.command) {
        case Command::Validate: cmd_validate(); break;
        case Command::Fit: (void)cmd_fit(); break;
        case Command::Predict: cmd_predict(std::nullopt); break;
        case Command::Diagnose: {
            const FitResult fit = res_.model ? [&] {
                // Residual of a given model on the observed range.
                const Series obs = observed();
                const Series pred = evaluate(*res_.model, inputs(res_.model->regressor_kinds()));
                const auto [o, p] = align(obs, pred, 0);
                std::vector<double> r(o.size());
                for (std::size_t i = 0; i < o.size(); ++i) r[i] = o[i] - p[i];
                const Goodness g = goodness(o, p);
                return FitResult{*res_.model, g.r2_dynamic, g.r2_cumulative, o, p,
                                 Series(o.start(), std::move(r), Unit::RatePerYear, res_.target), 0.0, {}};
            }()
                                               : do_fit(std::nullopt);
            cmd_diagnose(fit);
            break;
        }
        case Command::Forecast: cmd_forecast(); break;
        case Command::Report: {
            if (data_) cmd_validate();
            const FitResult fit = cmd_fit();
            cmd_predict(fit.model);
            cmd_diagnose(fit);
            try {
                cmd_forecast();
            } catch (const Error& e) {
                write_text(dir_ / "forecast.json", dump({{"meta", meta()}, {"error", error_json(e)}}));
            }
            write_charts(fit);
            break;
        }
        case Command::Synthesize: break;
    }
}

// --- synthetic data -----------------------------------------------------------------------

double parse_back(const std::string& text, double scale) { return std::strtod(text.c_str(), nullptr) * scale; }

}  // namespace

void synthesize(const std::string& dir, const std::string& preset_name, std::uint64_t seed) {
    const SegmentedModel model = preset(preset_name);
    const Frequency f = model.frequency();
    const int p = periods_per_year(f);
    const Period start = f == Frequency::Monthly ? Period(f, 1978, 1) : Period(f, 1970, 1);
    const Period end(f, 2009, p);
    const auto n = static_cast<std::size_t>(end - start + 1);

    std::mt19937_64 eng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    char buf[64];

    // Labour force levels from a slowly swinging growth rate.
    std::vector<double> levels(n);
    std::string lf_csv = "period,lf_thousands\n";
    double level = 5.0e6;
    double ar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double years = static_cast<double>(i) / p;
        ar = 0.9 * ar + 0.001 * z(eng);
        const double g = 0.018 + 0.008 * std::sin(2.0 * std::numbers::pi * years / 9.0) + ar;
        if (i > 0) level *= 1.0 + g / p;
        std::snprintf(buf, sizeof buf, "%.3f", level / 1000.0);
        lf_csv += (start + static_cast<std::int64_t>(i)).to_string() + "," + buf + "\n";
        levels[i] = parse_back(buf, 1000.0);
    }
    InputMap inputs;
    inputs.emplace(RegressorKind::LfGrowth,
                   growth_rate(Series(start, levels, Unit::Persons, "LF"), GrowthSpec::default_for(f)));

    auto rate_csv = [&](const std::string& column, double mean, double sd, std::vector<double>& parsed) {
        std::string csv = "period," + column + "\n";
        double x = 0.0;
        parsed.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            x = 0.95 * x + sd * z(eng);
            std::snprintf(buf, sizeof buf, "%.4f", 100.0 * (mean + x));
            csv += (start + static_cast<std::int64_t>(i)).to_string() + "," + buf + "\n";
            parsed[i] = parse_back(buf, 0.01);
        }
        return csv;
    };

    std::vector<std::pair<std::string, std::string>> files{{"lf.csv", lf_csv}};
    nlohmann::json sources = nlohmann::json::array();
    sources.push_back({{"path", "lf.csv"},
                       {"role", "LF"},
                       {"frequency", std::string(to_string(f))},
                       {"unit", "PERSONS"},
                       {"column_period", "period"},
                       {"column_value", "lf_thousands"},
                       {"scale", 1000}});
    for (const auto k : model.regressor_kinds()) {
        if (k == RegressorKind::LfGrowth) continue;
        std::vector<double> parsed;
        const std::string role = role_of(k);
        const std::string csv = k == RegressorKind::Unemployment ? rate_csv("ue_pct", 0.07, 0.002, parsed)
                                                                : rate_csv("cpi_pct", 0.03, 0.002, parsed);
        inputs.emplace(k, Series(start, parsed, Unit::RatePerYear, role));
        std::string name = role;
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
        files.emplace_back(name + ".csv", csv);
        sources.push_back({{"path", name + ".csv"},
                           {"role", role},
                           {"frequency", std::string(to_string(f))},
                           {"unit", "RATE_PER_YEAR"},
                           {"column_period", "period"},
                           {"column_value", role == "UE" ? "ue_pct" : "cpi_pct"},
                           {"scale", 0.01}});
    }

    const Series clean = evaluate(model, inputs);
    std::string target_csv = "period,value_pct\n";
    for (std::size_t i = 0; i < clean.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.4f", 100.0 * (clean[i] + 0.002 * z(eng)));
        target_csv += clean.period_at(i).to_string() + "," + buf + "\n";
    }
    std::string target_file = model.target();
    std::transform(target_file.begin(), target_file.end(), target_file.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    target_file += "_target.csv";
    files.emplace_back(target_file, target_csv);
    sources.push_back({{"path", target_file},
                       {"role", model.target()},
                       {"frequency", std::string(to_string(f))},
                       {"unit", "RATE_PER_YEAR"},
                       {"column_period", "period"},
                       {"column_value", "value_pct"},
                       {"scale", 0.01}});

    nlohmann::json manifest = {{"country", "SYNTHETIC"},
                               {"sources", sources},
                               {"known_breaks", {{{"period", Period(f, 2001, 1).to_string()},
                                                  {"note", "definition change (synthetic marker)"}}}}};
    auto breaks = nlohmann::json::array();
    nlohmann::json lags = nlohmann::json::object();
    for (std::size_t i = 1; i < model.segments().size(); ++i) breaks.push_back(model.segments()[i].start->to_string());
    for (const auto k : model.regressor_kinds()) lags[std::string(to_string(k))] = {0};
    nlohmann::json config = {{"target", model.target()},
                             {"frequency", std::string(to_string(f))},
                             {"breaks", breaks},
                             {"lag_grid", lags},
                             {"horizon", 2 * p},
                             {"diagnostics", {{"adf_lags", 1}, {"johansen_lags", 2}, {"johansen_trend", "NONE"}}}};
    files.emplace_back("manifest.json", dump(manifest));
    files.emplace_back("config.json", dump(config));
    for (const auto& [name, text] : files) write_text(fs::path(dir) / name, text);
}

int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    try {
        if (spec.command == Command::Synthesize) {
            synthesize(spec.out_dir, spec.preset.empty() ? "ue-monthly" : spec.preset, spec.seed);
            out << "wrote synthetic dataset to " << spec.out_dir << "\n";
            return 0;
        }
        Runner(spec, out).execute();
        return 0;
    } catch (const Error& e) {
        const nlohmann::json rec = {{"error", {{"code", std::string(error_name(e.code()))},
                                               {"exit_code", exit_code(e.code())},
                                               {"command", std::string(to_string(spec.command))},
                                               {"message", e.what()}}}};
        err << rec.dump() << "\n";
        try {
            write_text(fs::path(spec.out_dir) / "error.json", dump(rec));
        } catch (const Error&) {
        }
        return exit_code(e.code());
    } catch (const std::exception& e) {
        const nlohmann::json rec = {{"error", {{"code", "Internal"},
                                               {"exit_code", 1},
                                               {"command", std::string(to_string(spec.command))},
                                               {"message", e.what()}}}};
        err << rec.dump() << "\n";
        return 1;
    }
}

}  // namespace lfm
