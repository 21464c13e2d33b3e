#include "lfm/econotest.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "lfm/error.hpp"

namespace lfm {

std::string_view to_string(UnitRootTest t) noexcept {
    switch (t) {
        case UnitRootTest::Adf: return "ADF";
        case UnitRootTest::DfGls: return "DFGLS";
        case UnitRootTest::Pp: return "PP";
    }
    return "ADF";
}

std::string_view to_string(Deterministic d) noexcept {
    switch (d) {
        case Deterministic::None: return "NONE";
        case Deterministic::Constant: return "CONSTANT";
        case Deterministic::ConstantTrend: return "CONSTANT_TREND";
    }
    return "NONE";
}

std::string_view to_string(SignificanceLevel l) noexcept {
    switch (l) {
        case SignificanceLevel::Pct1: return "1%";
        case SignificanceLevel::Pct5: return "5%";
        case SignificanceLevel::Pct10: return "10%";
    }
    return "5%";
}

Deterministic parse_deterministic(std::string_view text) {
    if (text == "NONE") return Deterministic::None;
    if (text == "CONSTANT") return Deterministic::Constant;
    if (text == "CONSTANT_TREND") return Deterministic::ConstantTrend;
    fail(ErrorCode::ParseError, "unknown deterministic specification '" + std::string(text) + "'");
}

SignificanceLevel parse_level(std::string_view text) {
    if (text == "1%") return SignificanceLevel::Pct1;
    if (text == "5%") return SignificanceLevel::Pct5;
    if (text == "10%") return SignificanceLevel::Pct10;
    fail(ErrorCode::ParseError, "unknown significance level '" + std::string(text) + "'");
}

std::string_view to_string(JohansenTrend t) noexcept { return t == JohansenTrend::None ? "NONE" : "CONSTANT"; }

JohansenTrend parse_johansen_trend(std::string_view text) {
    if (text == "NONE") return JohansenTrend::None;
    if (text == "CONSTANT") return JohansenTrend::Constant;
    fail(ErrorCode::ParseError, "unknown Johansen trend specification '" + std::string(text) + "'");
}

double CriticalValues::at(SignificanceLevel l) const noexcept {
    switch (l) {
        case SignificanceLevel::Pct1: return pct1;
        case SignificanceLevel::Pct5: return pct5;
        case SignificanceLevel::Pct10: return pct10;
    }
    return pct5;
}

bool Decisions::at(SignificanceLevel l) const noexcept {
    switch (l) {
        case SignificanceLevel::Pct1: return pct1;
        case SignificanceLevel::Pct5: return pct5;
        case SignificanceLevel::Pct10: return pct10;
    }
    return pct5;
}

namespace {

Decisions left_tail(double stat, const CriticalValues& cv) {
    return {stat < cv.pct1, stat < cv.pct5, stat < cv.pct10};
}

struct Ols {
    Eigen::VectorXd beta;
    Eigen::VectorXd se;
    Eigen::VectorXd resid;
    double rss = 0.0;
    double s2 = 0.0;
};

Ols ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const auto k = x.cols();
    if (x.rows() <= k) fail(ErrorCode::InsufficientLength, "regression has no residual degrees of freedom");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) fail(ErrorCode::SingularRegression, "collinear regressors in test regression");
    Ols out;
    out.beta = qr.solve(y);
    out.resid = y - x * out.beta;
    out.rss = out.resid.squaredNorm();
    out.s2 = out.rss / static_cast<double>(x.rows() - k);
    if (!(out.s2 > 0.0)) fail(ErrorCode::SingularRegression, "test regression fits exactly");

    // (X'X)^-1 = P R^-1 R^-T P'
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd rinv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd cov_perm = rinv * rinv.transpose();
    const Eigen::MatrixXd cov = qr.colsPermutation() * cov_perm * qr.colsPermutation().transpose();
    out.se = (cov.diagonal() * out.s2).cwiseSqrt();
    return out;
}

struct DfRegression {
    double phi = 0.0;  // coefficient on y(t-1) in the differenced regression
    double se_phi = 0.0;
    double sum_gamma = 0.0;
    double s2 = 0.0;
    std::size_t nobs = 0;
    Eigen::VectorXd resid;
};

void require_finite(std::span<const double> s) {
    for (const double v : s) {
        if (is_missing(v)) fail(ErrorCode::MissingValue, "unit-root test input contains missing values");
    }
}

DfRegression df_regression(std::span<const double> y, int lags, Deterministic det) {
    const auto n = y.size();
    const auto p = static_cast<std::size_t>(lags);
    const std::size_t nobs = n - 1 - p;
    const std::size_t k = 1 + p + (det == Deterministic::None ? 0 : det == Deterministic::Constant ? 1 : 2);
    Eigen::MatrixXd x(nobs, k);
    Eigen::VectorXd dy(nobs);
    for (std::size_t row = 0; row < nobs; ++row) {
        const std::size_t t = row + p + 1;
        dy(row) = y[t] - y[t - 1];
        x(row, 0) = y[t - 1];
        for (std::size_t j = 1; j <= p; ++j) x(row, j) = y[t - j] - y[t - j - 1];
        if (det != Deterministic::None) x(row, p + 1) = 1.0;
        if (det == Deterministic::ConstantTrend) x(row, p + 2) = static_cast<double>(t);
    }
    const Ols fit = ols(x, dy);
    DfRegression out;
    out.phi = fit.beta(0);
    out.se_phi = fit.se(0);
    for (std::size_t j = 1; j <= p; ++j) out.sum_gamma += fit.beta(static_cast<Eigen::Index>(j));
    out.s2 = fit.s2;
    out.nobs = nobs;
    out.resid = fit.resid;
    return out;
}

struct PpStats {
    double z_t = 0.0;
    double z_rho = 0.0;
    std::size_t nobs = 0;
    int bandwidth = 0;
};

PpStats pp_statistics(std::span<const double> y, int bandwidth) {
    const DfRegression df = df_regression(y, 0, Deterministic::Constant);
    const auto t_obs = static_cast<double>(df.nobs);
    const int q = bandwidth < 0 ? default_pp_bandwidth(df.nobs) : bandwidth;
    const Eigen::VectorXd& u = df.resid;
    auto gamma = [&](Eigen::Index j) {
        double acc = 0.0;
        for (Eigen::Index i = j; i < u.size(); ++i) acc += u(i) * u(i - j);
        return acc / t_obs;
    };
    const double g0 = gamma(0);
    double lrv = g0;
    for (int j = 1; j <= q; ++j) lrv += 2.0 * (1.0 - static_cast<double>(j) / (q + 1)) * gamma(j);
    if (!(lrv > 0.0)) fail(ErrorCode::SingularRegression, "non-positive long-run variance");
    const double s = std::sqrt(df.s2);
    PpStats out;
    out.nobs = df.nobs;
    out.bandwidth = q;
    out.z_rho = t_obs * df.phi - 0.5 * (t_obs * t_obs * df.se_phi * df.se_phi / df.s2) * (lrv - g0);
    out.z_t = std::sqrt(g0 / lrv) * (df.phi / df.se_phi) - 0.5 * ((lrv - g0) / std::sqrt(lrv)) * (t_obs * df.se_phi / s);
    return out;
}

std::vector<double> gls_demean(std::span<const double> y) {
    const auto n = static_cast<double>(y.size());
    const double a = 1.0 - 7.0 / n;
    double szz = 1.0;
    double szy = y[0];
    for (std::size_t t = 1; t < y.size(); ++t) {
        const double z = 1.0 - a;
        szz += z * z;
        szy += z * (y[t] - a * y[t - 1]);
    }
    const double beta = szy / szz;
    std::vector<double> out(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) out[t] = y[t] - beta;
    return out;
}

std::vector<double> as_vector(const Series& s) { return {s.values().begin(), s.values().end()}; }

}  // namespace

// --- unit-root tests ----------------------------------------------------------------------

UnitRootReport adf_test(std::span<const double> s, int lags, Deterministic deterministic) {
    if (lags < 0) fail(ErrorCode::InvalidArgument, "negative ADF lag order");
    if (s.size() < static_cast<std::size_t>(lags) + 10) {
        fail(ErrorCode::InsufficientLength, "ADF with " + std::to_string(lags) + " lags needs at least " +
                                                std::to_string(lags + 10) + " observations");
    }
    require_finite(s);
    const DfRegression df = df_regression(s, lags, deterministic);
    UnitRootReport r;
    r.test = UnitRootTest::Adf;
    r.lags = lags;
    r.deterministic = deterministic;
    r.nobs = df.nobs;
    r.stat_t = df.phi / df.se_phi;
    r.stat_rho = static_cast<double>(df.nobs) * df.phi / (1.0 - df.sum_gamma);
    r.critical = lookup_critical(CriticalStat::AdfT, df.nobs, deterministic);
    r.reject_at = left_tail(r.stat_t, r.critical);
    r.critical_rho = lookup_critical(CriticalStat::AdfRho, df.nobs, deterministic);
    r.reject_rho_at = left_tail(*r.stat_rho, *r.critical_rho);
    return r;
}

UnitRootReport adf_test(const Series& s, int lags, Deterministic deterministic) {
    return adf_test(s.values(), lags, deterministic);
}

int default_pp_bandwidth(std::size_t n) noexcept {
    return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

UnitRootReport pp_test(std::span<const double> s, int bandwidth) {
    if (s.size() < 20) fail(ErrorCode::InsufficientLength, "Phillips-Perron needs at least 20 observations");
    require_finite(s);
    const PpStats st = pp_statistics(s, bandwidth);
    UnitRootReport r;
    r.test = UnitRootTest::Pp;
    r.lags = st.bandwidth;
    r.deterministic = Deterministic::Constant;
    r.nobs = st.nobs;
    r.stat_t = st.z_t;
    r.stat_rho = st.z_rho;
    r.critical = lookup_critical(CriticalStat::PpT, st.nobs, Deterministic::Constant);
    r.reject_at = left_tail(r.stat_t, r.critical);
    r.critical_rho = lookup_critical(CriticalStat::PpRho, st.nobs, Deterministic::Constant);
    r.reject_rho_at = left_tail(st.z_rho, *r.critical_rho);
    return r;
}

UnitRootReport pp_test(const Series& s, int bandwidth) { return pp_test(s.values(), bandwidth); }

UnitRootReport dfgls_test(std::span<const double> s, int lags) {
    if (lags < 0) fail(ErrorCode::InvalidArgument, "negative DF-GLS lag order");
    if (s.size() < static_cast<std::size_t>(lags) + 15) {
        fail(ErrorCode::InsufficientLength, "DF-GLS with " + std::to_string(lags) + " lags needs at least " +
                                                std::to_string(lags + 15) + " observations");
    }
    require_finite(s);
    const auto demeaned = gls_demean(s);
    const DfRegression df = df_regression(demeaned, lags, Deterministic::None);
    UnitRootReport r;
    r.test = UnitRootTest::DfGls;
    r.lags = lags;
    r.deterministic = Deterministic::Constant;
    r.nobs = df.nobs;
    r.stat_t = df.phi / df.se_phi;
    r.critical = lookup_critical(CriticalStat::DfglsT, df.nobs, Deterministic::Constant);
    r.reject_at = left_tail(r.stat_t, r.critical);
    return r;
}

UnitRootReport dfgls_test(const Series& s, int lags) { return dfgls_test(s.values(), lags); }

// --- cointegration ---------------------------------------------------------------------------

namespace {

struct EgCore {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> resid;
};

EgCore eg_regression(std::span<const double> y, std::span<const double> x) {
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
    if (!(sxx > 0.0)) fail(ErrorCode::DegenerateInput, "cointegrating regressor has zero variance");
    EgCore out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    out.resid.resize(y.size());
    double rss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        out.resid[i] = y[i] - out.intercept - out.slope * x[i];
        rss += out.resid[i] * out.resid[i];
    }
    if (rss <= 1e-20 * std::max(syy, sxx)) {
        fail(ErrorCode::DegenerateResidual, "cointegrating regression residual is identically zero");
    }
    return out;
}

double eg_statistic(std::span<const double> y, std::span<const double> x, int lags) {
    const EgCore core = eg_regression(y, x);
    const DfRegression df = df_regression(core.resid, lags, Deterministic::None);
    return df.phi / df.se_phi;
}

struct JohansenCore {
    std::vector<double> eigenvalues;
    std::vector<double> trace;
    std::size_t nobs = 0;
};

/// Reduced-rank regression for d = 1 or 2 series given as columns of `y`.
JohansenCore johansen_core(const Eigen::MatrixXd& y, int lags, JohansenTrend trend) {
    const auto n = y.rows();
    const auto d = y.cols();
    const Eigen::Index p = lags;
    const Eigen::Index t_obs = n - p;
    const Eigen::Index k2 = (p - 1) * d + (trend == JohansenTrend::Constant ? 1 : 0);

    Eigen::MatrixXd z0(t_obs, d);
    Eigen::MatrixXd z1(t_obs, d);
    Eigen::MatrixXd z2(t_obs, k2);
    for (Eigen::Index row = 0; row < t_obs; ++row) {
        const Eigen::Index t = row + p;
        z0.row(row) = y.row(t) - y.row(t - 1);
        z1.row(row) = y.row(t - 1);
        Eigen::Index col = 0;
        for (Eigen::Index j = 1; j < p; ++j) {
            for (Eigen::Index c = 0; c < d; ++c) z2(row, col++) = y(t - j, c) - y(t - j - 1, c);
        }
        if (trend == JohansenTrend::Constant) z2(row, col) = 1.0;
    }
    Eigen::MatrixXd r0 = z0;
    Eigen::MatrixXd r1 = z1;
    if (k2 > 0) {
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z2);
        r0 = z0 - z2 * qr.solve(z0);
        r1 = z1 - z2 * qr.solve(z1);
    }
    const double tt = static_cast<double>(t_obs);
    const Eigen::MatrixXd s00 = r0.transpose() * r0 / tt;
    const Eigen::MatrixXd s11 = r1.transpose() * r1 / tt;
    const Eigen::MatrixXd s01 = r0.transpose() * r1 / tt;

    auto singular = [](const Eigen::MatrixXd& s) {
        const double diag = s.diagonal().prod();
        return !(diag > 0.0) || s.determinant() <= 1e-12 * diag;
    };
    if (singular(s00) || singular(s11)) {
        fail(ErrorCode::SingularCovariance, "Johansen moment matrices are singular (collinear series?)");
    }

    // Symmetric form L^-1 S10 S00^-1 S01 L^-T with S11 = L L'.
    const Eigen::LLT<Eigen::MatrixXd> llt(s11);
    const Eigen::MatrixXd a = llt.matrixL().solve(s01.transpose());
    const Eigen::MatrixXd c = a * s00.ldlt().solve(a.transpose());

    std::vector<double> lambda;
    if (d == 1) {
        lambda = {c(0, 0)};
    } else {
        const double mid = 0.5 * (c(0, 0) + c(1, 1));
        const double off = 0.5 * (c(0, 1) + c(1, 0));
        const double half = 0.5 * (c(0, 0) - c(1, 1));
        const double rad = std::sqrt(half * half + off * off);
        lambda = {mid + rad, mid - rad};
    }
    for (double& l : lambda) l = std::clamp(l, 0.0, 1.0 - 1e-15);
    std::sort(lambda.begin(), lambda.end(), std::greater<>());

    JohansenCore out;
    out.eigenvalues = lambda;
    out.nobs = static_cast<std::size_t>(t_obs);
    out.trace.assign(lambda.size(), 0.0);
    for (std::size_t r = 0; r < lambda.size(); ++r) {
        double acc = 0.0;
        for (std::size_t i = r; i < lambda.size(); ++i) acc += std::log1p(-lambda[i]);
        out.trace[r] = -tt * acc;
    }
    return out;
}

Deterministic trend_key(JohansenTrend t) {
    return t == JohansenTrend::None ? Deterministic::None : Deterministic::Constant;
}

}  // namespace

CointegrationReport engle_granger(const Series& y, const Series& x, int lags, SignificanceLevel level) {
    const auto [ya, xa] = align(y, x, 0);
    if (ya.size() < 30) fail(ErrorCode::InsufficientOverlap, "Engle-Granger needs at least 30 common observations");
    if (ya.has_missing() || xa.has_missing()) fail(ErrorCode::MissingValue, "Engle-Granger inputs contain missing values");
    if (lags < 0) fail(ErrorCode::InvalidArgument, "negative lag order");
    const EgCore core = eg_regression(ya.values(), xa.values());
    if (core.resid.size() < static_cast<std::size_t>(lags) + 10) {
        fail(ErrorCode::InsufficientLength, "residual too short for the requested lags");
    }
    const DfRegression df = df_regression(core.resid, lags, Deterministic::None);

    UnitRootReport r;
    r.test = UnitRootTest::Adf;
    r.lags = lags;
    r.deterministic = Deterministic::None;
    r.nobs = df.nobs;
    r.stat_t = df.phi / df.se_phi;
    r.critical = lookup_critical(CriticalStat::EngleGrangerT, df.nobs, Deterministic::Constant);
    r.reject_at = left_tail(r.stat_t, r.critical);

    CointegrationReport out;
    out.engle_granger = r;
    out.eg_slope = core.slope;
    out.eg_intercept = core.intercept;
    out.eg_level = level;
    out.eg_cointegrated = r.reject_at.at(level);
    return out;
}

CointegrationReport johansen_test(const std::vector<Series>& series, int lags, JohansenTrend trend,
                                  SignificanceLevel level) {
    if (series.size() != 2) fail(ErrorCode::InvalidArgument, "Johansen test takes exactly two series");
    if (lags < 1) fail(ErrorCode::InvalidArgument, "Johansen VAR order must be >= 1");
    const auto [a, b] = align(series[0], series[1], 0);
    if (a.size() < 40) fail(ErrorCode::InsufficientLength, "Johansen test needs at least 40 common observations");
    if (a.size() <= static_cast<std::size_t>(2 * lags + 4)) {
        fail(ErrorCode::InsufficientLength, "too few observations for the VAR order");
    }
    if (a.has_missing() || b.has_missing()) fail(ErrorCode::MissingValue, "Johansen inputs contain missing values");
    Eigen::MatrixXd y(static_cast<Eigen::Index>(a.size()), 2);
    for (std::size_t i = 0; i < a.size(); ++i) {
        y(static_cast<Eigen::Index>(i), 0) = a[i];
        y(static_cast<Eigen::Index>(i), 1) = b[i];
    }
    const JohansenCore core = johansen_core(y, lags, trend);

    JohansenResult j;
    j.eigenvalues = core.eigenvalues;
    j.trace_stats = core.trace;
    j.trend = trend;
    j.lags = lags;
    j.nobs = core.nobs;
    j.level = level;
    for (std::size_t r = 0; r < 2; ++r) {
        const CriticalStat stat = r == 0 ? CriticalStat::JohansenTrace2 : CriticalStat::JohansenTrace1;
        j.trace_critical.push_back(lookup_critical(stat, core.nobs, trend_key(trend)));
    }
    j.rank = 0;
    while (j.rank < 2 && j.trace_stats[static_cast<std::size_t>(j.rank)] >
                             j.trace_critical[static_cast<std::size_t>(j.rank)].at(level)) {
        ++j.rank;
    }
    CointegrationReport out;
    out.johansen = j;
    return out;
}

// --- critical values -------------------------------------------------------------------------

std::string_view to_string(CriticalStat s) noexcept {
    switch (s) {
        case CriticalStat::AdfT: return "ADF_T";
        case CriticalStat::AdfRho: return "ADF_RHO";
        case CriticalStat::PpT: return "PP_T";
        case CriticalStat::PpRho: return "PP_RHO";
        case CriticalStat::DfglsT: return "DFGLS_T";
        case CriticalStat::EngleGrangerT: return "EG_T";
        case CriticalStat::JohansenTrace1: return "JOHANSEN_TRACE_1";
        case CriticalStat::JohansenTrace2: return "JOHANSEN_TRACE_2";
    }
    return "ADF_T";
}

CriticalStat parse_critical_stat(std::string_view text) {
    for (const auto s : {CriticalStat::AdfT, CriticalStat::AdfRho, CriticalStat::PpT, CriticalStat::PpRho,
                         CriticalStat::DfglsT, CriticalStat::EngleGrangerT, CriticalStat::JohansenTrace1,
                         CriticalStat::JohansenTrace2}) {
        if (to_string(s) == text) return s;
    }
    fail(ErrorCode::ParseError, "unknown statistic '" + std::string(text) + "'");
}

bool right_tailed(CriticalStat s) noexcept {
    return s == CriticalStat::JohansenTrace1 || s == CriticalStat::JohansenTrace2;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void random_walk(std::mt19937_64& eng, std::normal_distribution<double>& z, std::vector<double>& out) {
    double level = 0.0;
    out[0] = 0.0;
    for (std::size_t t = 1; t < out.size(); ++t) {
        level += z(eng);
        out[t] = level;
    }
}

double null_statistic(CriticalStat stat, std::size_t n, Deterministic det, std::mt19937_64& eng,
                      std::normal_distribution<double>& z) {
    std::vector<double> a(n + 1);
    random_walk(eng, z, a);
    switch (stat) {
        case CriticalStat::AdfT: {
            const DfRegression df = df_regression(a, 0, det);
            return df.phi / df.se_phi;
        }
        case CriticalStat::AdfRho: {
            const DfRegression df = df_regression(a, 0, det);
            return static_cast<double>(df.nobs) * df.phi;
        }
        case CriticalStat::PpT: return pp_statistics(a, -1).z_t;
        case CriticalStat::PpRho: return pp_statistics(a, -1).z_rho;
        case CriticalStat::DfglsT: {
            const DfRegression df = df_regression(gls_demean(a), 0, Deterministic::None);
            return df.phi / df.se_phi;
        }
        case CriticalStat::EngleGrangerT: {
            std::vector<double> b(n + 1);
            random_walk(eng, z, b);
            return eg_statistic(a, b, 0);
        }
        case CriticalStat::JohansenTrace1:
        case CriticalStat::JohansenTrace2: {
            const Eigen::Index d = stat == CriticalStat::JohansenTrace1 ? 1 : 2;
            Eigen::MatrixXd y(static_cast<Eigen::Index>(n + 1), d);
            for (Eigen::Index i = 0; i <= static_cast<Eigen::Index>(n); ++i) y(i, 0) = a[static_cast<std::size_t>(i)];
            if (d == 2) {
                std::vector<double> b(n + 1);
                random_walk(eng, z, b);
                for (Eigen::Index i = 0; i <= static_cast<Eigen::Index>(n); ++i) y(i, 1) = b[static_cast<std::size_t>(i)];
            }
            const auto trend = det == Deterministic::None ? JohansenTrend::None : JohansenTrend::Constant;
            return johansen_core(y, 1, trend).trace[0];
        }
    }
    return 0.0;
}

}  // namespace

CriticalValues simulate_critical_values(CriticalStat stat, std::size_t n, Deterministic det,
                                        std::size_t replications, std::uint64_t seed) {
    if (replications < 10000) fail(ErrorCode::InvalidArgument, "critical-value simulation needs >= 10000 replications");
    if (n < 20) fail(ErrorCode::InvalidArgument, "critical-value simulation needs n >= 20");
    const bool constant_only = stat == CriticalStat::PpT || stat == CriticalStat::PpRho ||
                               stat == CriticalStat::DfglsT || stat == CriticalStat::EngleGrangerT;
    if (constant_only && det != Deterministic::Constant) {
        fail(ErrorCode::InvalidArgument, std::string(to_string(stat)) + " is tabulated for CONSTANT only");
    }
    if (right_tailed(stat) && det == Deterministic::ConstantTrend) {
        fail(ErrorCode::InvalidArgument, "Johansen trace is tabulated for NONE and CONSTANT only");
    }

    constexpr std::size_t kBatch = 1000;
    std::vector<double> draws;
    draws.reserve(replications);
    for (std::size_t batch = 0; draws.size() < replications; ++batch) {
        std::mt19937_64 eng(splitmix64(seed ^ splitmix64(batch + 1)));
        std::normal_distribution<double> z(0.0, 1.0);
        const std::size_t count = std::min(kBatch, replications - draws.size());
        for (std::size_t i = 0; i < count; ++i) draws.push_back(null_statistic(stat, n, det, eng, z));
    }
    std::sort(draws.begin(), draws.end());
    if (right_tailed(stat)) return {quantile(draws, 0.99), quantile(draws, 0.95), quantile(draws, 0.90)};
    return {quantile(draws, 0.01), quantile(draws, 0.05), quantile(draws, 0.10)};
}

std::vector<CriticalTableRow> parse_critical_table(std::string_view csv) {
    std::vector<CriticalTableRow> rows;
    std::istringstream in{std::string(csv)};
    std::string line;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (header) {
            if (line != "test,n,deterministic,level,value") {
                fail(ErrorCode::ParseError, "unexpected critical-value table header '" + line + "'");
            }
            header = false;
            continue;
        }
        std::vector<std::string> f;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 5) fail(ErrorCode::ParseError, "critical-value table line " + std::to_string(line_no) + " malformed");
        try {
            rows.push_back({parse_critical_stat(f[0]), static_cast<std::size_t>(std::stoul(f[1])),
                            parse_deterministic(f[2]), parse_level(f[3]), std::stod(f[4])});
        } catch (const std::logic_error&) {
            fail(ErrorCode::ParseError, "critical-value table line " + std::to_string(line_no) + " malformed");
        }
    }
    return rows;
}

std::string format_critical_table(const std::vector<CriticalTableRow>& rows, std::string_view version) {
    std::ostringstream out;
    out << "# version: " << version << "\n";
    out << "test,n,deterministic,level,value\n";
    for (const auto& r : rows) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.4f", r.value);
        out << to_string(r.stat) << ',' << r.n << ',' << to_string(r.deterministic) << ',' << to_string(r.level)
            << ',' << buf << "\n";
    }
    return out.str();
}

CriticalValues lookup_critical(const std::vector<CriticalTableRow>& table, CriticalStat stat, std::size_t n,
                               Deterministic det) {
    std::map<std::size_t, CriticalValues> by_n;
    for (const auto& r : table) {
        if (r.stat != stat || r.deterministic != det) continue;
        auto& cv = by_n[r.n];
        switch (r.level) {
            case SignificanceLevel::Pct1: cv.pct1 = r.value; break;
            case SignificanceLevel::Pct5: cv.pct5 = r.value; break;
            case SignificanceLevel::Pct10: cv.pct10 = r.value; break;
        }
    }
    if (by_n.empty()) {
        fail(ErrorCode::TableMissing, "no critical values for " + std::string(to_string(stat)) + "/" +
                                          std::string(to_string(det)));
    }
    if (by_n.size() == 1 || n <= by_n.begin()->first) return by_n.begin()->second;

    auto lerp = [](const std::pair<const std::size_t, CriticalValues>& lo,
                   const std::pair<const std::size_t, CriticalValues>& hi, double n_target) {
        const double x0 = 1.0 / static_cast<double>(lo.first);
        const double x1 = 1.0 / static_cast<double>(hi.first);
        const double w = (1.0 / n_target - x0) / (x1 - x0);
        return CriticalValues{lo.second.pct1 + w * (hi.second.pct1 - lo.second.pct1),
                              lo.second.pct5 + w * (hi.second.pct5 - lo.second.pct5),
                              lo.second.pct10 + w * (hi.second.pct10 - lo.second.pct10)};
    };
    auto hi = by_n.lower_bound(n);
    if (hi == by_n.end()) {
        // Beyond the table: continue the last segment toward 1/n = 0.
        const auto last = std::prev(by_n.end());
        return lerp(*std::prev(last), *last, static_cast<double>(n));
    }
    if (hi->first == n) return hi->second;
    return lerp(*std::prev(hi), *hi, static_cast<double>(n));
}

namespace detail {
extern const char* const kCriticalTableCsv;
}

const std::vector<CriticalTableRow>& critical_table() {
    static const std::vector<CriticalTableRow> rows = parse_critical_table(detail::kCriticalTableCsv);
    return rows;
}

std::string_view critical_table_version() {
    static const std::string version = [] {
        std::istringstream in{std::string(detail::kCriticalTableCsv)};
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind("# version:", 0) == 0) {
                auto v = line.substr(10);
                v.erase(0, v.find_first_not_of(' '));
                return v;
            }
        }
        return std::string("unversioned");
    }();
    return version;
}

CriticalValues lookup_critical(CriticalStat stat, std::size_t n, Deterministic det) {
    return lookup_critical(critical_table(), stat, n, det);
}

// --- JSON -------------------------------------------------------------------------------------

void to_json(nlohmann::json& j, const CriticalValues& c) { j = {{"1%", c.pct1}, {"5%", c.pct5}, {"10%", c.pct10}}; }

void to_json(nlohmann::json& j, const Decisions& d) { j = {{"1%", d.pct1}, {"5%", d.pct5}, {"10%", d.pct10}}; }

void to_json(nlohmann::json& j, const UnitRootReport& r) {
    j = nlohmann::json::object();
    j["test"] = std::string(to_string(r.test));
    j["stat_t"] = r.stat_t;
    j["stat_rho"] = r.stat_rho ? nlohmann::json(*r.stat_rho) : nlohmann::json(nullptr);
    j["lags"] = r.lags;
    j["deterministic"] = std::string(to_string(r.deterministic));
    j["nobs"] = r.nobs;
    j["critical"] = r.critical;
    j["reject_at"] = r.reject_at;
    if (r.critical_rho) j["critical_rho"] = *r.critical_rho;
    if (r.reject_rho_at) j["reject_rho_at"] = *r.reject_rho_at;
}

void to_json(nlohmann::json& j, const JohansenResult& r) {
    j = nlohmann::json::object();
    j["rank"] = r.rank;
    j["eigenvalues"] = r.eigenvalues;
    j["trace_stats"] = r.trace_stats;
    j["trace_critical"] = r.trace_critical;
    j["trend_spec"] = std::string(to_string(r.trend));
    j["lags"] = r.lags;
    j["nobs"] = r.nobs;
    j["level"] = std::string(to_string(r.level));
}

void to_json(nlohmann::json& j, const CointegrationReport& r) {
    j = nlohmann::json::object();
    if (r.engle_granger) {
        j["engle_granger"] = {{"residual_test", *r.engle_granger},
                              {"slope", *r.eg_slope},
                              {"intercept", *r.eg_intercept},
                              {"level", std::string(to_string(r.eg_level))},
                              {"cointegrated", *r.eg_cointegrated}};
    }
    if (r.johansen) j["johansen"] = *r.johansen;
}

}  // namespace lfm
