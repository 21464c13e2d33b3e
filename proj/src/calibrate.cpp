#include "lfm/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include <Eigen/Dense>

#include "lfm/error.hpp"

namespace lfm {

namespace {

// Grid values are snapped so that e.g. -10 + 790 * 0.01 reads back as -2.1.
double snap(double v) { return std::round(v * 1e12) / 1e12; }

constexpr double kExhaustiveRmsBudget = 2e7;       // slope/lag combinations
constexpr double kExhaustiveEndpointBudget = 1e8;  // combinations x observations

}  // namespace

// --- grids and config ---------------------------------------------------------

void GridRange::validate(std::string_view what) const {
    if (!std::isfinite(min) || !std::isfinite(max) || !std::isfinite(step) || !(min < max) || !(step > 0.0)) {
        fail(ErrorCode::EmptyGrid, std::string(what) + " grid needs min < max and step > 0");
    }
}

std::size_t GridRange::size() const {
    return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
}

double GridRange::value(std::size_t i) const { return snap(min + static_cast<double>(i) * step); }

std::string_view to_string(Objective o) noexcept { return o == Objective::CumRms ? "CUM_RMS" : "CUM_ENDPOINT_REL"; }

std::string_view to_string(SearchMode m) noexcept {
    switch (m) {
        case SearchMode::Auto: return "AUTO";
        case SearchMode::Exhaustive: return "EXHAUSTIVE";
        case SearchMode::TwoStage: return "TWO_STAGE";
    }
    return "AUTO";
}

FitConfig FitConfig::defaults(const std::vector<RegressorKind>& kinds) {
    FitConfig cfg;
    for (const RegressorKind k : kinds) {
        cfg.slope_grid[k] = GridRange{-10.0, 10.0, 0.01};
        cfg.lag_grid[k] = {0, 1, 2, 3};
    }
    return cfg;
}

void FitConfig::validate() const {
    if (slope_grid.empty()) fail(ErrorCode::EmptyGrid, "no regressors in slope_grid");
    for (const auto& [kind, grid] : slope_grid) grid.validate(std::string(to_string(kind)) + " slope");
    intercept_grid.validate("intercept");
    for (const auto& [kind, lags] : lag_grid) {
        if (!slope_grid.contains(kind)) {
            fail(ErrorCode::InvalidConfig, "lag_grid names " + std::string(to_string(kind)) +
                                               " which has no slope grid");
        }
        if (lags.empty()) fail(ErrorCode::EmptyGrid, "empty lag grid for " + std::string(to_string(kind)));
        for (const int lag : lags) {
            if (lag < 0) fail(ErrorCode::InvalidConfig, "negative lag in lag_grid");
        }
    }
    for (std::size_t i = 1; i < breaks.size(); ++i) {
        if (!(breaks[i - 1] < breaks[i])) fail(ErrorCode::InvalidConfig, "breaks must be strictly increasing");
    }
    if (refine_factor < 2) fail(ErrorCode::InvalidConfig, "refine_factor must be >= 2");
    if (threads < 0) fail(ErrorCode::InvalidConfig, "threads must be >= 0");
}

std::vector<RegressorKind> FitConfig::kinds() const {
    std::vector<RegressorKind> out;
    for (const auto& [kind, grid] : slope_grid) out.push_back(kind);
    return out;
}

std::vector<int> FitConfig::lags(RegressorKind kind) const {
    const auto it = lag_grid.find(kind);
    if (it == lag_grid.end()) return {0};
    auto lags = it->second;
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
    return lags;
}

namespace {

nlohmann::json grid_json(const GridRange& g) { return {{"min", g.min}, {"max", g.max}, {"step", g.step}}; }

GridRange grid_from(const nlohmann::json& j) {
    return GridRange{j.at("min").get<double>(), j.at("max").get<double>(), j.at("step").get<double>()};
}

}  // namespace

void to_json(nlohmann::json& j, const FitConfig& cfg) {
    j = nlohmann::json::object();
    auto breaks = nlohmann::json::array();
    for (const Period& b : cfg.breaks) breaks.push_back(b.to_string());
    j["breaks"] = std::move(breaks);
    for (const auto& [kind, grid] : cfg.slope_grid) j["slope_grid"][std::string(to_string(kind))] = grid_json(grid);
    j["intercept_grid"] = grid_json(cfg.intercept_grid);
    j["lag_grid"] = nlohmann::json::object();
    for (const auto& [kind, lags] : cfg.lag_grid) j["lag_grid"][std::string(to_string(kind))] = lags;
    j["objective"] = std::string(to_string(cfg.objective));
    j["search"] = {{"mode", std::string(to_string(cfg.search))}, {"refine_factor", cfg.refine_factor}};
}

FitConfig fit_config_from_json(const nlohmann::json& j) {
    try {
        FitConfig cfg;
        if (j.contains("slope_grid")) {
            for (const auto& [name, g] : j.at("slope_grid").items()) {
                cfg.slope_grid[parse_regressor_kind(name)] = grid_from(g);
            }
        }
        if (j.contains("intercept_grid")) cfg.intercept_grid = grid_from(j.at("intercept_grid"));
        if (j.contains("lag_grid")) {
            for (const auto& [name, lags] : j.at("lag_grid").items()) {
                cfg.lag_grid[parse_regressor_kind(name)] = lags.get<std::vector<int>>();
            }
        }
        if (j.contains("objective")) {
            const auto name = j.at("objective").get<std::string>();
            if (name == "CUM_RMS") {
                cfg.objective = Objective::CumRms;
            } else if (name == "CUM_ENDPOINT_REL") {
                cfg.objective = Objective::CumEndpointRel;
            } else {
                fail(ErrorCode::InvalidConfig, "unknown objective '" + name + "'");
            }
        }
        if (j.contains("search")) {
            const auto& s = j.at("search");
            if (s.contains("mode")) {
                const auto mode = s.at("mode").get<std::string>();
                if (mode == "AUTO") {
                    cfg.search = SearchMode::Auto;
                } else if (mode == "EXHAUSTIVE") {
                    cfg.search = SearchMode::Exhaustive;
                } else if (mode == "TWO_STAGE") {
                    cfg.search = SearchMode::TwoStage;
                } else {
                    fail(ErrorCode::InvalidConfig, "unknown search mode '" + mode + "'");
                }
            }
            if (s.contains("refine_factor")) cfg.refine_factor = s.at("refine_factor").get<int>();
        }
        if (j.contains("breaks") && !j.at("breaks").empty()) {
            // Break periods are read with the frequency inferred from their text.
            for (const auto& b : j.at("breaks")) cfg.breaks.push_back(Period::parse(b.get<std::string>()));
        }
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidConfig, std::string("malformed fit config: ") + e.what());
    }
}

void to_json(nlohmann::json& j, const Series& s) {
    j = nlohmann::json::object();
    j["role"] = s.role();
    j["frequency"] = std::string(to_string(s.frequency()));
    j["unit"] = std::string(to_string(s.unit()));
    j["start"] = s.start().to_string();
    auto values = nlohmann::json::array();
    for (const double v : s.values()) values.push_back(is_missing(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
    j["values"] = std::move(values);
}

void to_json(nlohmann::json& j, const FitResult& r) {
    j = nlohmann::json::object();
    j["model"] = r.model;
    j["r2_dynamic"] = r.r2_dynamic;
    j["r2_cumulative"] = r.r2_cumulative;
    j["objective_value"] = r.objective_value;
    j["segment_objectives"] = r.segment_objectives;
    j["residual"] = r.residual;
}

// --- grid search ------------------------------------------------------------------

namespace {

/// Cumulative curves of one segment for one lag combination.
struct Design {
    std::size_t n = 0;
    std::vector<double> co;               // cumulative observed
    std::vector<std::vector<double>> cx;  // cumulative regressors
    std::vector<double> ct;               // cumulative of the constant 1
};

struct Candidate {
    double objective = std::numeric_limits<double>::infinity();
    std::vector<double> slopes;
    double intercept = 0.0;
    std::vector<int> lags;
    bool valid = false;
};

/// Strict weak order: objective, then |slopes|, |intercept|, lags; signed values last for totality.
bool better(const Candidate& a, const Candidate& b) {
    if (!b.valid) return a.valid;
    if (!a.valid) return false;
    if (a.objective != b.objective) return a.objective < b.objective;
    for (std::size_t k = 0; k < a.slopes.size(); ++k) {
        const double x = std::abs(a.slopes[k]);
        const double y = std::abs(b.slopes[k]);
        if (x != y) return x < y;
    }
    if (std::abs(a.intercept) != std::abs(b.intercept)) return std::abs(a.intercept) < std::abs(b.intercept);
    if (a.lags != b.lags) return a.lags < b.lags;
    if (a.slopes != b.slopes) return a.slopes < b.slopes;
    return a.intercept < b.intercept;
}

/**
 * Sum of squared cumulative residuals, via the exact decomposition
 *   SSR(theta) = SSR(theta*) + (theta - theta*)' Z'Z (theta - theta*)
 * around any least-squares solution theta*. Minimizing over the intercept
 * for fixed slopes is a 1-D convex quadratic, so only the two grid points
 * bracketing its continuous minimizer need checking.
 */
class RmsEvaluator {
public:
    RmsEvaluator(const Design& d, const GridRange& icpt) : icpt_(icpt), k_(d.cx.size()) {
        Eigen::MatrixXd z(d.n, k_ + 1);
        Eigen::VectorXd y(d.n);
        for (std::size_t t = 0; t < d.n; ++t) {
            for (std::size_t k = 0; k < k_; ++k) z(t, k) = d.cx[k][t];
            z(t, k_) = d.ct[t];
            y(t) = d.co[t];
        }
        theta_ = z.colPivHouseholderQr().solve(y);
        rss_ = (y - z * theta_).squaredNorm();
        gram_ = z.transpose() * z;
    }

    /// Best grid intercept for the given slopes: (grid index, SSR).
    std::pair<std::size_t, double> best(const std::vector<double>& slopes) const {
        const std::size_t kb = k_;
        double coupling = 0.0;
        for (std::size_t k = 0; k < k_; ++k) coupling += gram_(kb, k) * (slopes[k] - theta_(k));
        const double b_opt = theta_(kb) - coupling / gram_(kb, kb);
        const std::size_t m = icpt_.size();
        const double pos = std::floor((b_opt - icpt_.min) / icpt_.step);
        const auto lo = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(m - 1)));
        const std::size_t hi = std::min(lo + 1, m - 1);

        std::pair<std::size_t, double> result{lo, ssr(slopes, icpt_.value(lo))};
        if (hi != lo) {
            const double s = ssr(slopes, icpt_.value(hi));
            if (s < result.second ||
                (s == result.second && std::abs(icpt_.value(hi)) < std::abs(icpt_.value(lo)))) {
                result = {hi, s};
            }
        }
        return result;
    }

    [[nodiscard]] double ssr(const std::vector<double>& slopes, double intercept) const {
        Eigen::VectorXd d(k_ + 1);
        for (std::size_t k = 0; k < k_; ++k) d(k) = slopes[k] - theta_(k);
        d(k_) = intercept - theta_(k_);
        return std::max(0.0, rss_ + d.dot(gram_ * d));
    }

private:
    const GridRange& icpt_;
    std::size_t k_;
    Eigen::VectorXd theta_;
    Eigen::MatrixXd gram_;
    double rss_ = 0.0;
};

/// max_t |co - cp| / |co|; convex in the intercept, minimized by ternary search on the grid index.
class EndpointEvaluator {
public:
    EndpointEvaluator(const Design& d, const GridRange& icpt) : d_(d), icpt_(icpt), weight_(d.n, 0.0) {
        double scale = 0.0;
        for (const double v : d.co) scale = std::max(scale, std::abs(v));
        for (std::size_t t = 0; t < d.n; ++t) {
            if (scale == 0.0) {
                weight_[t] = 1.0;
            } else if (std::abs(d.co[t]) > 1e-12 * scale) {
                weight_[t] = 1.0 / std::abs(d.co[t]);
            }
        }
    }

    std::pair<std::size_t, double> best(const std::vector<double>& slopes) const {
        std::vector<double> r(d_.n);
        for (std::size_t t = 0; t < d_.n; ++t) {
            double v = d_.co[t];
            for (std::size_t k = 0; k < slopes.size(); ++k) v -= slopes[k] * d_.cx[k][t];
            r[t] = v;
        }
        auto f = [&](std::size_t i) {
            const double b = icpt_.value(i);
            double worst = 0.0;
            for (std::size_t t = 0; t < d_.n; ++t) worst = std::max(worst, weight_[t] * std::abs(r[t] - b * d_.ct[t]));
            return worst;
        };
        std::size_t lo = 0;
        std::size_t hi = icpt_.size() - 1;
        while (hi - lo > 2) {
            const std::size_t m1 = lo + (hi - lo) / 3;
            const std::size_t m2 = hi - (hi - lo) / 3;
            if (f(m1) <= f(m2)) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        std::pair<std::size_t, double> result{lo, f(lo)};
        for (std::size_t i = lo + 1; i <= hi; ++i) {
            const double v = f(i);
            if (v < result.second ||
                (v == result.second && std::abs(icpt_.value(i)) < std::abs(icpt_.value(result.first)))) {
                result = {i, v};
            }
        }
        return result;
    }

private:
    const Design& d_;
    const GridRange& icpt_;
    std::vector<double> weight_;
};

/// Index sets per slope dimension; the scan covers their cartesian product.
using IndexSets = std::vector<std::vector<std::size_t>>;

template <class Evaluator>
Candidate scan(const Evaluator& eval, const IndexSets& sets, const std::vector<GridRange>& grids,
               const GridRange& icpt, const std::vector<int>& lags, int threads) {
    std::size_t total = 1;
    for (const auto& s : sets) total *= s.size();

    auto run = [&](std::size_t first, std::size_t last) {
        Candidate best;
        std::vector<double> slopes(sets.size());
        for (std::size_t flat = first; flat < last; ++flat) {
            std::size_t rem = flat;
            for (std::size_t k = sets.size(); k-- > 0;) {
                slopes[k] = grids[k].value(sets[k][rem % sets[k].size()]);
                rem /= sets[k].size();
            }
            const auto [b_idx, obj] = eval.best(slopes);
            Candidate c{obj, slopes, icpt.value(b_idx), lags, true};
            if (better(c, best)) best = std::move(c);
        }
        return best;
    };

    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), total / 4096 + 1);
    if (workers <= 1) return run(0, total);

    // Fixed contiguous chunks reduced in order; the comparator is a strict order, so the
    // winner matches the sequential scan.
    std::vector<Candidate> partial(workers);
    std::vector<std::thread> pool;
    const std::size_t chunk = (total + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t first = w * chunk;
            const std::size_t last = std::min(total, first + chunk);
            if (first < last) partial[w] = run(first, last);
        });
    }
    for (auto& t : pool) t.join();
    Candidate best;
    for (auto& c : partial) {
        if (better(c, best)) best = std::move(c);
    }
    return best;
}

IndexSets full_sets(const std::vector<GridRange>& grids) {
    IndexSets sets;
    for (const auto& g : grids) {
        std::vector<std::size_t> idx(g.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        sets.push_back(std::move(idx));
    }
    return sets;
}

IndexSets coarse_sets(const std::vector<GridRange>& grids, std::size_t factor) {
    IndexSets sets;
    for (const auto& g : grids) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < g.size(); i += factor) idx.push_back(i);
        if (idx.back() != g.size() - 1) idx.push_back(g.size() - 1);
        sets.push_back(std::move(idx));
    }
    return sets;
}

std::size_t index_of(const GridRange& g, double value) {
    const double pos = std::round((value - g.min) / g.step);
    return static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(g.size() - 1)));
}

IndexSets refine_sets(const std::vector<GridRange>& grids, const std::vector<double>& centre, std::size_t factor) {
    IndexSets sets;
    for (std::size_t k = 0; k < grids.size(); ++k) {
        const std::size_t c = index_of(grids[k], centre[k]);
        const std::size_t lo = c > factor ? c - factor : 0;
        const std::size_t hi = std::min(grids[k].size() - 1, c + factor);
        std::vector<std::size_t> idx;
        for (std::size_t i = lo; i <= hi; ++i) idx.push_back(i);
        sets.push_back(std::move(idx));
    }
    return sets;
}

struct SegmentFit {
    Candidate best;
    double objective = 0.0;  // RMS or max relative distance for this segment
    double ssr = 0.0;        // only meaningful for CumRms
    std::size_t n = 0;
};

struct FitPlan {
    std::vector<RegressorKind> kinds;
    std::vector<GridRange> grids;
    std::vector<std::vector<int>> lag_sets;
    Period from;
    Period to;
};

Design build_design(const Series& observed, const InputMap& inputs, const FitPlan& plan, const Period& from,
                    const Period& to, const std::vector<int>& lags) {
    const double p = periods_per_year(observed.frequency());
    Design d;
    d.n = static_cast<std::size_t>(to - from) + 1;
    d.co.resize(d.n);
    d.ct.resize(d.n);
    d.cx.assign(plan.kinds.size(), std::vector<double>(d.n));
    double acc_o = 0.0;
    std::vector<double> acc_x(plan.kinds.size(), 0.0);
    for (std::size_t i = 0; i < d.n; ++i) {
        const Period t = from + static_cast<std::int64_t>(i);
        acc_o += observed.at(t) / p;
        d.co[i] = acc_o;
        d.ct[i] = static_cast<double>(i + 1) / p;
        for (std::size_t k = 0; k < plan.kinds.size(); ++k) {
            acc_x[k] += inputs.at(plan.kinds[k]).at(t - lags[k]) / p;
            d.cx[k][i] = acc_x[k];
        }
    }
    return d;
}

template <class Evaluator>
Candidate search_segment(const Evaluator& eval, const FitPlan& plan, const FitConfig& cfg,
                         const std::vector<int>& lags, std::size_t n_obs, int threads) {
    double combos = 1.0;
    for (const auto& g : plan.grids) combos *= static_cast<double>(g.size());
    for (const auto& l : plan.lag_sets) combos *= static_cast<double>(l.size());

    bool two_stage = cfg.search == SearchMode::TwoStage;
    if (cfg.search == SearchMode::Auto) {
        two_stage = cfg.objective == Objective::CumRms
                        ? combos > kExhaustiveRmsBudget
                        : combos * static_cast<double>(n_obs) > kExhaustiveEndpointBudget;
    }
    if (!two_stage) return scan(eval, full_sets(plan.grids), plan.grids, cfg.intercept_grid, lags, threads);

    const auto factor = static_cast<std::size_t>(cfg.refine_factor);
    const Candidate coarse = scan(eval, coarse_sets(plan.grids, factor), plan.grids, cfg.intercept_grid, lags, threads);
    Candidate fine = scan(eval, refine_sets(plan.grids, coarse.slopes, factor), plan.grids, cfg.intercept_grid, lags,
                          threads);
    return better(coarse, fine) ? coarse : fine;
}

SegmentFit fit_segment(const Series& observed, const InputMap& inputs, const FitPlan& plan, const FitConfig& cfg,
                       const Period& from, const Period& to, int threads) {
    SegmentFit out;
    out.n = static_cast<std::size_t>(to - from) + 1;

    // Odometer over the lag combinations.
    std::vector<std::size_t> pos(plan.kinds.size(), 0);
    while (true) {
        std::vector<int> lags(plan.kinds.size());
        for (std::size_t k = 0; k < lags.size(); ++k) lags[k] = plan.lag_sets[k][pos[k]];
        const Design d = build_design(observed, inputs, plan, from, to, lags);
        Candidate c = cfg.objective == Objective::CumRms
                          ? search_segment(RmsEvaluator(d, cfg.intercept_grid), plan, cfg, lags, d.n, threads)
                          : search_segment(EndpointEvaluator(d, cfg.intercept_grid), plan, cfg, lags, d.n, threads);
        if (better(c, out.best)) out.best = std::move(c);

        std::size_t k = 0;
        for (; k < pos.size(); ++k) {
            if (++pos[k] < plan.lag_sets[k].size()) break;
            pos[k] = 0;
        }
        if (k == pos.size()) break;
    }

    if (cfg.objective == Objective::CumRms) {
        out.ssr = out.best.objective;
        out.objective = std::sqrt(out.ssr / static_cast<double>(out.n));
    } else {
        out.objective = out.best.objective;
    }
    return out;
}

void require_no_missing(const Series& s, const Period& from, const Period& to, const std::string& what) {
    for (Period t = from; t <= to; t = t + 1) {
        if (is_missing(s.at(t))) fail(ErrorCode::CoverageGap, what + " is missing at " + t.to_string());
    }
}

FitPlan make_plan(const Series& observed, const InputMap& inputs, const FitConfig& cfg) {
    FitPlan plan{cfg.kinds(), {}, {}, observed.start(), observed.empty() ? observed.start() : observed.end()};
    if (observed.empty()) fail(ErrorCode::CoverageGap, "observed series is empty");
    std::optional<Period> lo = observed.start();
    std::optional<Period> hi = observed.end();
    for (const RegressorKind kind : plan.kinds) {
        const auto it = inputs.find(kind);
        if (it == inputs.end()) fail(ErrorCode::MissingRegressor, "no input series for " + std::string(to_string(kind)));
        const Series& in = it->second;
        if (in.frequency() != observed.frequency()) {
            fail(ErrorCode::FrequencyMismatch, "input " + std::string(to_string(kind)) +
                                                   " and observed series differ in frequency");
        }
        if (in.empty()) fail(ErrorCode::CoverageGap, "empty input for " + std::string(to_string(kind)));
        const auto lags = cfg.lags(kind);
        lo = std::max(*lo, in.start() + lags.back());
        hi = std::min(*hi, in.end() + lags.front());
        plan.grids.push_back(cfg.slope_grid.at(kind));
        plan.lag_sets.push_back(lags);
    }
    for (const Period& b : cfg.breaks) {
        if (b.frequency() != observed.frequency()) {
            fail(ErrorCode::FrequencyMismatch, "break " + b.to_string() + " does not match the observed frequency");
        }
    }
    if (*hi < *lo) fail(ErrorCode::CoverageGap, "observed and lagged inputs do not overlap");
    plan.from = *lo;
    plan.to = *hi;
    require_no_missing(observed, plan.from, plan.to, "observed '" + observed.role() + "'");
    for (std::size_t k = 0; k < plan.kinds.size(); ++k) {
        const Series& in = inputs.at(plan.kinds[k]);
        require_no_missing(in, plan.from - plan.lag_sets[k].back(), plan.to - plan.lag_sets[k].front(),
                           "input " + std::string(to_string(plan.kinds[k])));
    }
    return plan;
}

}  // namespace

FitResult fit_cumulative(const Series& observed, const InputMap& inputs, const FitConfig& cfg) {
    cfg.validate();
    const FitPlan plan = make_plan(observed, inputs, cfg);

    // Segment bounds on the fit range.
    std::vector<std::pair<Period, Period>> bounds;
    Period seg_start = plan.from;
    for (const Period& b : cfg.breaks) {
        if (b <= seg_start || b > plan.to) {
            fail(ErrorCode::SegmentTooShort, "break " + b.to_string() + " leaves an empty segment in " +
                                                 plan.from.to_string() + ".." + plan.to.to_string());
        }
        bounds.emplace_back(seg_start, b - 1);
        seg_start = b;
    }
    bounds.emplace_back(seg_start, plan.to);
    for (const auto& [from, to] : bounds) {
        if (to - from + 1 < 4) {
            fail(ErrorCode::SegmentTooShort, "segment " + from.to_string() + ".." + to.to_string() +
                                                 " has fewer than 4 observations");
        }
    }

    const int threads = cfg.threads > 0 ? cfg.threads
                                        : static_cast<int>(std::max(1u, std::min(8u, std::thread::hardware_concurrency())));

    std::vector<Segment> segments;
    std::vector<double> segment_objectives;
    double pooled_ssr = 0.0;
    double worst = 0.0;
    for (std::size_t s = 0; s < bounds.size(); ++s) {
        const auto& [from, to] = bounds[s];
        const SegmentFit fit = fit_segment(observed, inputs, plan, cfg, from, to, threads);
        Segment seg;
        if (s > 0) seg.start = from;
        if (s + 1 < bounds.size()) seg.end = to;
        for (std::size_t k = 0; k < plan.kinds.size(); ++k) {
            seg.slopes.emplace(Regressor{plan.kinds[k], fit.best.lags[k]}, fit.best.slopes[k]);
        }
        seg.intercept = fit.best.intercept;
        segments.push_back(std::move(seg));
        segment_objectives.push_back(fit.objective);
        pooled_ssr += fit.ssr;
        worst = std::max(worst, fit.objective);
    }

    SegmentedModel model(observed.role().empty() ? "target" : observed.role(), observed.frequency(),
                         std::move(segments));
    const Series obs = observed.slice(plan.from, plan.to);
    const Series predicted = evaluate(model, inputs).slice(plan.from, plan.to);
    std::vector<double> resid(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) resid[i] = obs[i] - predicted[i];
    const Goodness g = goodness(obs, predicted);

    const double objective = cfg.objective == Objective::CumRms
                                 ? std::sqrt(pooled_ssr / static_cast<double>(obs.size()))
                                 : worst;
    return FitResult{std::move(model),
                     g.r2_dynamic,
                     g.r2_cumulative,
                     obs,
                     predicted,
                     Series(plan.from, std::move(resid), Unit::RatePerYear, "residual"),
                     objective,
                     std::move(segment_objectives)};
}

// --- comparison estimators and scores -------------------------------------------------------

OlsFit fit_ols(const Series& observed, const Series& input, int lag) {
    const auto [y, x] = align(observed, input, lag);
    if (y.size() < 3) fail(ErrorCode::InsufficientOverlap, "fit_ols needs at least 3 overlapping points");
    if (y.has_missing() || x.has_missing()) fail(ErrorCode::MissingValue, "fit_ols inputs contain missing values");
    const auto n = static_cast<double>(y.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) fail(ErrorCode::DegenerateInput, "regressor has zero variance");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - intercept - slope * x[i];
        ssr += e * e;
    }
    const double r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    return {slope, intercept, r2};
}

namespace {

double r_squared(std::span<const double> obs, std::span<const double> pred) {
    double mean = 0.0;
    for (const double v : obs) mean += v;
    mean /= static_cast<double>(obs.size());
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        ss_tot += (obs[i] - mean) * (obs[i] - mean);
        ss_res += (obs[i] - pred[i]) * (obs[i] - pred[i]);
    }
    if (ss_tot == 0.0) fail(ErrorCode::ZeroVariance, "observed series has zero variance");
    return 1.0 - ss_res / ss_tot;
}

}  // namespace

Goodness goodness(const Series& observed, const Series& predicted) {
    const auto [obs, pred] = align(observed, predicted, 0);
    if (obs.size() < 3) fail(ErrorCode::InsufficientOverlap, "goodness needs at least 3 common points");
    if (obs.has_missing() || pred.has_missing()) fail(ErrorCode::MissingValue, "goodness inputs contain missing values");
    const double dyn = r_squared(obs.values(), pred.values());
    const Series co = cumulative(obs);
    const Series cp = cumulative(pred);
    return {dyn, r_squared(co.values(), cp.values())};
}

std::vector<BreakScore> break_scan(const Series& observed, const InputMap& inputs, const std::vector<Period>& candidates,
                                   const FitConfig& cfg) {
    if (candidates.empty()) fail(ErrorCode::InvalidArgument, "break_scan needs at least one candidate");
    std::vector<BreakScore> scores;
    for (const Period& c : candidates) {
        FitConfig single = cfg;
        single.breaks = {c};
        scores.push_back({c, fit_cumulative(observed, inputs, single).objective_value});
    }
    std::stable_sort(scores.begin(), scores.end(),
                     [](const BreakScore& a, const BreakScore& b) { return a.objective < b.objective; });
    return scores;
}

double rmsfe(const Series& observed, const Series& predicted, int horizon) {
    if (horizon < 0) fail(ErrorCode::InvalidArgument, "negative horizon");
    const auto [obs, pred] = align(observed, predicted, 0);
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (is_missing(obs[i]) || is_missing(pred[i])) continue;
        acc += (obs[i] - pred[i]) * (obs[i] - pred[i]);
        ++n;
    }
    if (n == 0) fail(ErrorCode::EmptyOverlap, "no common non-missing points for rmsfe");
    return std::sqrt(acc / static_cast<double>(n));
}

}  // namespace lfm
