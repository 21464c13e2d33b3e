// Acceptance checks: prints one PASS/FAIL/SKIP line per criterion, exits non-zero on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lfm/calibrate.hpp"
#include "lfm/econotest.hpp"
#include "lfm/error.hpp"
#include "lfm/ingest.hpp"
#include "lfm/model.hpp"
#include "lfm/report.hpp"
#include "synth.hpp"

using namespace lfm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    enum Kind { Pass, Fail, Skip } kind;
    std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::Pass : Outcome::Fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

constexpr auto kLf = RegressorKind::LfGrowth;

// 1 ------------------------------------------------------------------------------------

struct Expected {
    std::string name;
    std::vector<std::map<RegressorKind, double>> slopes;
    std::vector<double> intercepts;
};

Outcome preset_fidelity() {
    using K = RegressorKind;
    const std::vector<Expected> want{
        {"phillips-annual", {{{K::CpiInflation, -0.47}}, {{K::CpiInflation, -1.5}}}, {0.112, 0.105}},
        {"ue-annual", {{{K::LfGrowth, -2.1}}, {{K::LfGrowth, -2.1}}}, {0.13, 0.098}},
        {"ue-monthly", {{{K::LfGrowth, -1.77}}, {{K::LfGrowth, -2.1}}}, {0.124, 0.0977}},
        {"dgdp-annual", {{{K::LfGrowth, 7.8}}, {{K::LfGrowth, 4.2}}}, {-0.024, -0.042}},
        {"dgdp-quarterly", {{{K::LfGrowth, 6.5}}, {{K::LfGrowth, 3.3}}}, {-0.021, -0.026}},
        {"cpi-generalized",
         {{{K::LfGrowth, 8.3}, {K::Unemployment, 0.97}},
          {{K::LfGrowth, 3.9}, {K::Unemployment, 0.97}},
          {{K::LfGrowth, 3.9}, {K::Unemployment, 0.88}}},
         {-0.1, -0.1, -0.1}},
    };
    const auto presets = australian_presets();
    int checked = 0;
    for (const auto& e : want) {
        const auto it = presets.find(e.name);
        if (it == presets.end()) return {Outcome::Fail, "missing preset " + e.name};
        const auto& segs = it->second.segments();
        if (segs.size() != e.intercepts.size()) return {Outcome::Fail, e.name + ": wrong segment count"};
        for (std::size_t i = 0; i < segs.size(); ++i) {
            if (segs[i].intercept != e.intercepts[i]) return {Outcome::Fail, e.name + ": intercept differs"};
            ++checked;
            if (segs[i].slopes.size() != e.slopes[i].size()) return {Outcome::Fail, e.name + ": regressor set differs"};
            for (const auto& [kind, v] : e.slopes[i]) {
                if (segs[i].slope(kind) != v) return {Outcome::Fail, e.name + ": slope differs"};
                ++checked;
            }
        }
    }
    return verdict(presets.size() == want.size(), fmt("%d coefficients bit-exact across %zu presets", checked, want.size()));
}

// 2 ------------------------------------------------------------------------------------

FitConfig recovery_config() { return FitConfig::defaults({kLf}); }

Outcome estimator_recovery() {
    const FitConfig cfg = recovery_config();
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto d = synth::monthly(seed);
        const FitResult r = fit_cumulative(d.observed, {{kLf, d.regressor}}, cfg);
        const auto& s = r.model.segments().front();
        if (std::abs(s.slope(kLf) + 2.1) <= 0.1 && std::abs(s.intercept - 0.098) <= 0.005) ++hits;
    }
    return verdict(hits >= 95, fmt("%d/100 trials within slope +-0.1 and intercept +-0.005 (need >= 95)", hits));
}

// 3 ------------------------------------------------------------------------------------

Outcome attenuation() {
    double sum = 0.0;
    const int trials = 1000;
    for (int seed = 1; seed <= trials; ++seed) {
        const auto d = synth::monthly(static_cast<std::uint64_t>(seed));
        sum += std::abs(fit_ols(d.observed, d.regressor, 0).slope);
    }
    const double mean = sum / trials;
    const FitConfig cfg = recovery_config();
    const double step = cfg.slope_grid.at(kLf).step;
    const auto clean = synth::monthly(1, 0.0, 0.0);
    const double slope = fit_cumulative(clean.observed, {{kLf, clean.regressor}}, cfg).model.segments()[0].slope(kLf);
    const bool ok = mean < 2.1 && std::abs(slope + 2.1) <= step + 1e-12;
    return verdict(ok, fmt("mean |OLS slope| %.4f over %d trials (need < 2.1); noise-free cumulative slope %.4f", mean,
                           trials, slope));
}

// 4 ------------------------------------------------------------------------------------

Outcome critical_values() {
    const auto a288 = simulate_critical_values(CriticalStat::AdfT, 288, Deterministic::Constant, 100000);
    const auto a122 = simulate_critical_values(CriticalStat::AdfT, 122, Deterministic::Constant, 100000);
    const auto p122 = simulate_critical_values(CriticalStat::PpRho, 122, Deterministic::Constant, 100000);
    const bool ok = std::abs(a288.pct1 + 3.46) <= 0.10 && std::abs(a122.pct1 + 3.50) <= 0.10 &&
                    std::abs(p122.pct1 + 19.87) <= 1.0;
    return verdict(ok, fmt("ADF 1%% n=288 %.4f (-3.46 +-0.10), n=122 %.4f (-3.50 +-0.10); PP rho 1%% n=122 %.3f "
                           "(-19.87 +-1.0)",
                           a288.pct1, a122.pct1, p122.pct1));
}

// 5 ------------------------------------------------------------------------------------

Outcome size_power() {
    std::mt19937_64 eng(500);
    int rw = 0, wn = 0;
    for (int i = 0; i < 1000; ++i) {
        rw += adf_test(synth::random_walk(eng, 500), 1).reject_at.pct1 ? 1 : 0;
        wn += adf_test(synth::white_noise(eng, 500), 1).reject_at.pct1 ? 1 : 0;
    }
    int r1 = 0, r0 = 0;
    for (int i = 0; i < 500; ++i) {
        const auto [a, b] = synth::cointegrated(eng, 200);
        r1 += johansen_test({synth::as_series(a), synth::as_series(b)}).johansen->rank == 1 ? 1 : 0;
        const auto x = synth::random_walk(eng, 200);
        const auto y = synth::random_walk(eng, 200);
        r0 += johansen_test({synth::as_series(x), synth::as_series(y)}).johansen->rank == 0 ? 1 : 0;
    }
    const bool ok = rw <= 30 && wn >= 990 && r1 >= 450 && r0 >= 450;
    return verdict(ok, fmt("ADF at 1%%: random walk rejected %d/1000 (<= 30), white noise %d/1000 (>= 990); "
                           "Johansen at 5%%: rank 1 %d/500, rank 0 %d/500 (>= 450)",
                           rw, wn, r1, r0));
}

// 6 ------------------------------------------------------------------------------------

Outcome break_detection() {
    const Period truth(Frequency::Annual, 1995);
    std::vector<Period> cands;
    for (int k = -2; k <= 2; ++k) cands.push_back(truth + k);
    FitConfig cfg;
    cfg.slope_grid[kLf] = {-10, 10, 0.01};
    cfg.lag_grid[kLf] = {0};
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto d = synth::annual_break(seed, truth);
        const auto ranked = break_scan(d.observed, {{kLf, d.regressor}}, cands, cfg);
        if (ranked.front().period == truth) ++hits;
    }
    return verdict(hits >= 90, fmt("true break ranked first in %d/100 trials (need >= 90)", hits));
}

// 7 ------------------------------------------------------------------------------------

/// Annual DGDP and monthly UE fits on user data; the manifest path comes from LFM_DATA_MANIFEST.
Outcome data_reproduction() {
    const char* path = std::getenv("LFM_DATA_MANIFEST");
    if (!path || !*path) return {Outcome::Skip, "set LFM_DATA_MANIFEST to a manifest with annual LF/DGDP and monthly LF/UE"};
    const Dataset data = load(load_manifest(path));
    const auto clip = [](const Series& s, int y0, int y1) {
        const int p = periods_per_year(s.frequency());
        return s.slice(std::max(s.start(), Period(s.frequency(), y0, 1)), std::min(s.end(), Period(s.frequency(), y1, p)));
    };
    const auto breaks_of = [](const SegmentedModel& m) {
        std::vector<Period> b;
        for (std::size_t i = 1; i < m.segments().size(); ++i) b.push_back(*m.segments()[i].start);
        return b;
    };

    const SegmentedModel dgdp = preset("dgdp-annual");
    const Series lf_a = growth_rate(data.get("LF", Frequency::Annual), GrowthSpec::default_for(Frequency::Annual));
    FitConfig ca = FitConfig::defaults({kLf});
    ca.breaks = breaks_of(dgdp);
    ca.lag_grid[kLf] = {0};
    const FitResult fa = fit_cumulative(clip(data.get("DGDP", Frequency::Annual), 1974, 2009), {{kLf, lf_a}}, ca);
    bool ok = fa.r2_cumulative >= 0.99;
    for (std::size_t i = 0; i < dgdp.segments().size(); ++i) {
        ok = ok && std::abs(fa.model.segments()[i].slope(kLf) - dgdp.segments()[i].slope(kLf)) <= 0.5;
    }

    const SegmentedModel ue = preset("ue-monthly");
    const Series lf_m = growth_rate(data.get("LF", Frequency::Monthly), GrowthSpec::default_for(Frequency::Monthly));
    FitConfig cm = FitConfig::defaults({kLf});
    cm.breaks = breaks_of(ue);
    cm.lag_grid[kLf] = {0};
    const FitResult fm = fit_cumulative(clip(data.get("UE", Frequency::Monthly), 1974, 2009), {{kLf, lf_m}}, cm);
    ok = ok && fm.r2_dynamic >= 0.75;
    for (std::size_t i = 0; i < ue.segments().size(); ++i) {
        ok = ok && std::abs(fm.model.segments()[i].slope(kLf) - ue.segments()[i].slope(kLf)) <= 0.15 &&
             std::abs(fm.model.segments()[i].intercept - ue.segments()[i].intercept) <= 0.01;
    }
    const bool unit_root_rejected = adf_test(fm.residual, 1).reject_at.pct1;
    const int rank = johansen_test({fm.observed, fm.predicted}).johansen->rank;
    ok = ok && unit_root_rejected && rank == 1;
    return verdict(ok, fmt("DGDP r2_cum %.4f, UE r2_dyn %.4f, residual ADF 1%% %s, Johansen rank %d", fa.r2_cumulative,
                           fm.r2_dynamic, unit_root_rejected ? "rejects" : "does not reject", rank));
}

// 8 ------------------------------------------------------------------------------------

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "lfm_acceptance_determinism";
    fs::remove_all(dir);
    synthesize((dir / "data").string(), "ue-monthly", 20111014);
    const auto t0 = std::chrono::steady_clock::now();
    for (const char* out : {"a", "b"}) {
        RunSpec spec;
        spec.command = Command::Report;
        spec.manifest = (dir / "data" / "manifest.json").string();
        spec.config = (dir / "data" / "config.json").string();
        spec.out_dir = (dir / out).string();
        std::ostringstream o, e;
        if (run(spec, o, e) != 0) return {Outcome::Fail, "report failed: " + e.str()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    int files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
        const auto ext = entry.path().extension();
        if (ext != ".json" && ext != ".csv") continue;
        const fs::path other = dir / "b" / fs::relative(entry.path(), dir / "a");
        if (!fs::exists(other) || read_file(entry.path()) != read_file(other)) {
            return {Outcome::Fail, "outputs differ: " + fs::relative(entry.path(), dir / "a").string()};
        }
        ++files;
    }
    fs::remove_all(dir);
    return verdict(files > 0 && secs < 10.0, fmt("%d JSON/CSV files byte-identical across two runs, %.2f s", files, secs));
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"preset fidelity", preset_fidelity},
        {"estimator recovery", estimator_recovery},
        {"attenuation bias", attenuation},
        {"critical values", critical_values},
        {"test size and power", size_power},
        {"break detection", break_detection},
        {"data reproduction", data_reproduction},
        {"pipeline determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const Error& e) {
            o = {Outcome::Fail, std::string(error_name(e.code())) + ": " + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const char* tag = o.kind == Outcome::Pass ? "PASS" : o.kind == Outcome::Fail ? "FAIL" : "SKIP";
        if (o.kind == Outcome::Fail) ++failed;
        std::printf("%s %zu %s: %s [%.1fs]\n", tag, i + 1, criteria[i].first.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
