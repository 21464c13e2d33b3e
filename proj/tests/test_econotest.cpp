#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "lfm/econotest.hpp"
#include "lfm/error.hpp"
#include "synth.hpp"

using namespace lfm;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an lfm::Error");
    return ErrorCode::InvalidArgument;
}

std::vector<double> affine(const std::vector<double>& v, double a, double b) {
    std::vector<double> out;
    for (const double x : v) out.push_back(a * x + b);
    return out;
}

}  // namespace

TEST_CASE("constant series is a singular regression") {
    const std::vector<double> c(100, 3.0);
    CHECK(code_of([&] { (void)adf_test(c, 1); }) == ErrorCode::SingularRegression);
    CHECK(code_of([&] { (void)pp_test(c); }) == ErrorCode::SingularRegression);
    CHECK(code_of([&] { (void)adf_test(std::vector<double>(5, 1.0), 1); }) == ErrorCode::InsufficientLength);
}

TEST_CASE("ADF without lags and PP with zero bandwidth share the t statistic") {
    std::mt19937_64 eng(3);
    const auto v = synth::ar1(eng, 200, 0.8);
    const auto a = adf_test(v, 0, Deterministic::Constant);
    const auto p = pp_test(v, 0);
    CHECK(a.stat_t == doctest::Approx(p.stat_t).epsilon(1e-9));
    CHECK(*a.stat_rho == doctest::Approx(*p.stat_rho).epsilon(1e-9));
    CHECK(a.nobs == 199);
}

TEST_CASE("statistics are invariant to affine transformations") {
    std::mt19937_64 eng(4);
    const auto v = synth::ar1(eng, 150, 0.9);
    const auto w = affine(v, 3.7, -12.0);
    CHECK(adf_test(v, 2).stat_t == doctest::Approx(adf_test(w, 2).stat_t).epsilon(1e-9));
    CHECK(adf_test(v, 2, Deterministic::ConstantTrend).stat_t ==
          doctest::Approx(adf_test(w, 2, Deterministic::ConstantTrend).stat_t).epsilon(1e-9));
    CHECK(pp_test(v).stat_t == doctest::Approx(pp_test(w).stat_t).epsilon(1e-9));
    CHECK(*pp_test(v).stat_rho == doctest::Approx(*pp_test(w).stat_rho).epsilon(1e-9));
    CHECK(dfgls_test(v, 1).stat_t == doctest::Approx(dfgls_test(w, 1).stat_t).epsilon(1e-9));
}

TEST_CASE("critical values move left with more deterministic terms") {
    std::mt19937_64 eng(5);
    const auto v = synth::random_walk(eng, 200);
    const auto n = adf_test(v, 1, Deterministic::None).critical;
    const auto c = adf_test(v, 1, Deterministic::Constant).critical;
    const auto t = adf_test(v, 1, Deterministic::ConstantTrend).critical;
    CHECK(t.pct5 < c.pct5);
    CHECK(c.pct5 < n.pct5);
    CHECK(c.pct1 < c.pct5);
    CHECK(c.pct5 < c.pct10);
    CHECK(c.pct5 == doctest::Approx(-2.87).epsilon(0.02));
}

TEST_CASE("ADF size and power") {
    std::mt19937_64 eng(6);
    int rw = 0, wn = 0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i) {
        rw += adf_test(synth::random_walk(eng, 250), 1).reject_at.pct5 ? 1 : 0;
        wn += adf_test(synth::white_noise(eng, 250), 1).reject_at.pct5 ? 1 : 0;
    }
    CHECK(rw <= 20);
    CHECK(wn == trials);
}

TEST_CASE("PP rejects a stationary AR(1) and accepts a random walk") {
    std::mt19937_64 eng(7);
    int ar = 0, rw_rho = 0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i) {
        ar += pp_test(synth::ar1(eng, 200, 0.5)).reject_at.pct5 ? 1 : 0;
        rw_rho += pp_test(synth::random_walk(eng, 200)).reject_rho_at->pct5 ? 1 : 0;
    }
    CHECK(ar >= trials * 95 / 100);
    CHECK(rw_rho <= 20);
    CHECK(default_pp_bandwidth(100) == 4);
    CHECK(default_pp_bandwidth(500) == 5);
}

TEST_CASE("DF-GLS") {
    std::mt19937_64 eng(8);
    int power = 0, size = 0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i) {
        const auto v = synth::ar1(eng, 200, 0.3);
        bool any = false;
        for (int p = 1; p <= 4; ++p) any = any || dfgls_test(v, p).reject_at.pct5;
        power += any ? 1 : 0;
        size += dfgls_test(synth::random_walk(eng, 200), 1).reject_at.pct5 ? 1 : 0;
    }
    CHECK(power >= trials * 95 / 100);
    CHECK(size <= 20);
    const auto r = dfgls_test(synth::white_noise(eng, 100), 2);
    CHECK(r.test == UnitRootTest::DfGls);
    CHECK(!r.stat_rho);
    CHECK(code_of([&] { (void)dfgls_test(std::vector<double>(10, 1.0), 1); }) == ErrorCode::InsufficientLength);
}

TEST_CASE("Engle-Granger") {
    std::mt19937_64 eng(9);
    int coint = 0, indep = 0;
    const int trials = 100;
    for (int i = 0; i < trials; ++i) {
        const auto [a, b] = synth::cointegrated(eng, 200);
        coint += *engle_granger(synth::as_series(a), synth::as_series(b)).eg_cointegrated ? 1 : 0;
        const auto x = synth::random_walk(eng, 200);
        const auto y = synth::random_walk(eng, 200);
        indep += *engle_granger(synth::as_series(y), synth::as_series(x)).eg_cointegrated ? 1 : 0;
    }
    CHECK(coint >= 90);
    CHECK(indep <= 15);
}

TEST_CASE("Engle-Granger errors") {
    std::mt19937_64 eng(10);
    const auto x = synth::random_walk(eng, 100);
    CHECK(code_of([&] { (void)engle_granger(synth::as_series(x), synth::as_series(x)); }) ==
          ErrorCode::DegenerateResidual);
    const auto shortx = synth::random_walk(eng, 20);
    CHECK(code_of([&] { (void)engle_granger(synth::as_series(shortx), synth::as_series(shortx)); }) ==
          ErrorCode::InsufficientOverlap);
    CHECK(code_of([&] {
              (void)engle_granger(synth::as_series(x), synth::as_series(std::vector<double>(100, 1.0)));
          }) == ErrorCode::DegenerateInput);
}

TEST_CASE("Johansen") {
    std::mt19937_64 eng(11);
    int r1 = 0, r0 = 0;
    const int trials = 100;
    for (int i = 0; i < trials; ++i) {
        const auto [a, b] = synth::cointegrated(eng, 200);
        const auto j = *johansen_test({synth::as_series(a), synth::as_series(b)}).johansen;
        r1 += j.rank == 1 ? 1 : 0;
        REQUIRE(j.eigenvalues.size() == 2);
        CHECK(j.eigenvalues[0] >= j.eigenvalues[1]);
        CHECK(j.eigenvalues[1] >= 0.0);
        CHECK(j.eigenvalues[0] < 1.0);
        CHECK(j.trace_stats[0] >= j.trace_stats[1]);
        const auto x = synth::random_walk(eng, 200);
        const auto y = synth::random_walk(eng, 200);
        r0 += johansen_test({synth::as_series(x), synth::as_series(y)}).johansen->rank == 0 ? 1 : 0;
    }
    CHECK(r1 >= 85);
    CHECK(r0 >= 85);
}

TEST_CASE("Johansen errors") {
    std::mt19937_64 eng(12);
    const auto x = synth::random_walk(eng, 100);
    CHECK(code_of([&] { (void)johansen_test({synth::as_series(x), synth::as_series(x)}); }) ==
          ErrorCode::SingularCovariance);
    CHECK(code_of([&] { (void)johansen_test({synth::as_series(x)}); }) == ErrorCode::InvalidArgument);
    const auto s = synth::random_walk(eng, 30);
    CHECK(code_of([&] { (void)johansen_test({synth::as_series(s), synth::as_series(s)}); }) ==
          ErrorCode::InsufficientLength);
}

TEST_CASE("simulated critical values are deterministic") {
    const auto a = simulate_critical_values(CriticalStat::AdfT, 100, Deterministic::Constant, 10000, 99);
    const auto b = simulate_critical_values(CriticalStat::AdfT, 100, Deterministic::Constant, 10000, 99);
    CHECK(a.pct1 == b.pct1);
    CHECK(a.pct5 == b.pct5);
    CHECK(a.pct10 == b.pct10);
    CHECK(a.pct1 < a.pct5);
    const auto j = simulate_critical_values(CriticalStat::JohansenTrace1, 100, Deterministic::None, 10000, 99);
    CHECK(j.pct1 > j.pct5);
    CHECK(code_of([] { (void)simulate_critical_values(CriticalStat::AdfT, 100, Deterministic::Constant, 9999); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([] { (void)simulate_critical_values(CriticalStat::PpT, 100, Deterministic::None, 10000); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("critical table parse, format and lookup") {
    const std::vector<CriticalTableRow> rows{
        {CriticalStat::AdfT, 100, Deterministic::Constant, SignificanceLevel::Pct1, -3.5},
        {CriticalStat::AdfT, 100, Deterministic::Constant, SignificanceLevel::Pct5, -2.9},
        {CriticalStat::AdfT, 100, Deterministic::Constant, SignificanceLevel::Pct10, -2.6},
        {CriticalStat::AdfT, 200, Deterministic::Constant, SignificanceLevel::Pct1, -3.4},
        {CriticalStat::AdfT, 200, Deterministic::Constant, SignificanceLevel::Pct5, -2.8},
        {CriticalStat::AdfT, 200, Deterministic::Constant, SignificanceLevel::Pct10, -2.5},
    };
    const std::string text = format_critical_table(rows, "test");
    CHECK(text.rfind("# version: test\n", 0) == 0);
    const auto back = parse_critical_table(text);
    REQUIRE(back.size() == rows.size());
    CHECK(back[4].value == -2.8);
    CHECK(format_critical_table(back, "test") == text);

    // 1/n halfway between 1/100 and 1/200 is n = 400/3.
    const auto mid = lookup_critical(rows, CriticalStat::AdfT, 133, Deterministic::Constant);
    CHECK(mid.pct5 == doctest::Approx(-2.8 - 0.1 * (1.0 / 133 - 1.0 / 200) / (1.0 / 100 - 1.0 / 200)));
    CHECK(lookup_critical(rows, CriticalStat::AdfT, 50, Deterministic::Constant).pct5 == -2.9);
    CHECK(lookup_critical(rows, CriticalStat::AdfT, 200, Deterministic::Constant).pct1 == -3.4);
    CHECK(lookup_critical(rows, CriticalStat::AdfT, 100000, Deterministic::Constant).pct5 < -2.7);
    CHECK(code_of([&] { (void)lookup_critical(rows, CriticalStat::PpT, 100, Deterministic::Constant); }) ==
          ErrorCode::TableMissing);
    CHECK(code_of([] { (void)parse_critical_table("a,b\n"); }) == ErrorCode::ParseError);

    CHECK(!critical_table().empty());
    CHECK(!critical_table_version().empty());
    CHECK(lookup_critical(CriticalStat::JohansenTrace2, 200, Deterministic::None).pct5 > 10.0);
}

TEST_CASE("report JSON") {
    std::mt19937_64 eng(13);
    const nlohmann::json j = adf_test(synth::white_noise(eng, 100), 1);
    CHECK(j.at("critical").contains("5%"));
    CHECK(j.at("reject_at").at("5%").get<bool>());
}
