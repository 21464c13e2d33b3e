#pragma once

// Seeded synthetic fixtures shared by unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lfm/series.hpp"

namespace synth {

struct Pair {
    lfm::Series observed;   ///< target with observation noise
    lfm::Series regressor;  ///< growth rate with observation noise
    lfm::Series clean;      ///< noise-free growth rate
};

/// Labour-force growth: one slow cycle over the sample plus an eight-year cycle.
inline double growth_path(int t, int n, int periods_per_year, double slow_amplitude) {
    const double years = static_cast<double>(t) / periods_per_year;
    return 0.02 + slow_amplitude * std::cos(2.0 * std::numbers::pi * t / n) +
           0.008 * std::sin(2.0 * std::numbers::pi * years / 8.0);
}

/// target = slope * g + intercept (intercept_after from `break_at` on), noise on both series.
inline Pair make(std::uint64_t seed, lfm::Frequency f, int n, double slope, double intercept, double sigma_obs,
                 double sigma_reg, double slow_amplitude, std::optional<lfm::Period> break_at = std::nullopt,
                 double intercept_after = 0.0) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    const lfm::Period start(f, f == lfm::Frequency::Annual ? 1974 : 1985, 1);
    std::vector<double> y(static_cast<std::size_t>(n)), x(y.size()), c(y.size());
    for (int t = 0; t < n; ++t) {
        const auto i = static_cast<std::size_t>(t);
        const double g = growth_path(t, n, lfm::periods_per_year(f), slow_amplitude);
        const double b = break_at && !(start + t < *break_at) ? intercept_after : intercept;
        c[i] = g;
        y[i] = slope * g + b + sigma_obs * z(eng);
        x[i] = g + sigma_reg * z(eng);
    }
    return {lfm::Series(start, y, lfm::Unit::RatePerYear, "UE"), lfm::Series(start, x, lfm::Unit::RatePerYear, "LF"),
            lfm::Series(start, c, lfm::Unit::RatePerYear, "LF")};
}

/// Monthly N = 300 family used for recovery and attenuation checks.
inline Pair monthly(std::uint64_t seed, double sigma_obs = 0.005, double sigma_reg = 0.005) {
    return make(seed, lfm::Frequency::Monthly, 300, -2.1, 0.098, sigma_obs, sigma_reg, 0.03);
}

/// Annual 1974-2009 series with an intercept drop of 0.03 (0.128 to 0.098) at `break_at`.
inline Pair annual_break(std::uint64_t seed, lfm::Period break_at, double sigma = 0.002) {
    return make(seed, lfm::Frequency::Annual, 36, -2.1, 0.128, sigma, sigma, 0.015, break_at, 0.098);
}

inline std::vector<double> random_walk(std::mt19937_64& eng, std::size_t n) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> v(n);
    double level = 0.0;
    for (auto& x : v) {
        level += z(eng);
        x = level;
    }
    return v;
}

inline std::vector<double> white_noise(std::mt19937_64& eng, std::size_t n) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = z(eng);
    return v;
}

inline std::vector<double> ar1(std::mt19937_64& eng, std::size_t n, double phi) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> v(n);
    double x = 0.0;
    for (auto& out : v) {
        x = phi * x + z(eng);
        out = x;
    }
    return v;
}

/// Triangular pair: a random walk and 0.5 times it plus a stationary AR(1) spread.
inline std::pair<std::vector<double>, std::vector<double>> cointegrated(std::mt19937_64& eng, std::size_t n) {
    const auto trend = random_walk(eng, n);
    const auto e = ar1(eng, n, 0.5);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = 0.5 * trend[i] + e[i];
    return {trend, b};
}

inline lfm::Series as_series(const std::vector<double>& v, lfm::Frequency f = lfm::Frequency::Monthly,
                             std::string role = "X") {
    return lfm::Series(lfm::Period(f, 1990, 1), v, lfm::Unit::Index, std::move(role));
}

}  // namespace synth
