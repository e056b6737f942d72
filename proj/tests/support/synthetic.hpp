#pragma once

// Test-only generators. Fixed seeds, libstdc++ distributions.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "entrovol/date.hpp"
#include "entrovol/ingest.hpp"

namespace entrovol::testing {

/// Weekday calendar starting at `start` (inclusive if it is a weekday).
inline std::vector<Date> weekdays(Date start, std::size_t n) {
    std::vector<Date> out;
    Date d = start;
    while (out.size() < n) {
        const auto wd = std::chrono::weekday{std::chrono::sys_days{d.ymd()}};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(d);
        d = d + 1;
    }
    return out;
}

/// GARCH(1,1) log returns with a few volatility bursts, compounded into prices.
/// Roughly the texture of daily crude-oil closes.
inline ingest::PriceSeries synthetic_prices(std::size_t n, std::uint64_t seed = 7, double start_price = 25.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::student_t_distribution<double> t(5.0);
    const double omega = 4e-6, a = 0.07, b = 0.9;
    double h = omega / (1.0 - a - b);
    double eps = 0.0;
    ingest::PriceSeries out;
    out.source_id = "SYNTH";
    const auto dates = weekdays(Date(1986, 1, 2), n);
    double p = start_price;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            h = omega + a * eps * eps + b * h;
            // occasional shocks
            const double burst = (i % 2311 == 1500) ? 25.0 : 1.0;
            eps = std::sqrt(h * burst) * t(rng) * std::sqrt(3.0 / 5.0);
            p *= std::exp(eps);
        }
        out.observations.push_back({dates[i], p});
    }
    (void)z;
    return out;
}

inline std::string to_fred_csv(const ingest::PriceSeries& s, const std::string& id = "DCOILWTICO") {
    std::string out = "DATE," + id + "\n";
    char buf[64];
    for (const auto& p : s.observations) {
        std::snprintf(buf, sizeof buf, "%.2f", p.value);
        out += p.date.iso() + "," + buf + "\n";
    }
    return out;
}

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, sd);
    std::vector<double> out(n);
    for (auto& v : out) v = z(rng);
    return out;
}

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
    auto e = white_noise(n, seed);
    for (std::size_t i = 1; i < n; ++i) e[i] += e[i - 1];
    return e;
}

inline DatedSeries dated(const std::vector<double>& v, Date start = Date(2000, 1, 3)) {
    const auto dates = weekdays(start, v.size());
    DatedSeries out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = {dates[i], v[i]};
    return out;
}

}  // namespace entrovol::testing
