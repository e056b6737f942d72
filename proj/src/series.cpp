#include "entrovol/series.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "entrovol/error.hpp"

namespace entrovol::series {

namespace {

// Neumaier-compensated accumulator; supports removal by adding -x.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x)) {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + carry; }
};

}  // namespace

void RollingConfig::validate() const {
    if (width < 2) throw InvalidConfig("window width must be >= 2, got " + std::to_string(width));
    if (step < 1) throw InvalidConfig("window step must be >= 1");
}

std::size_t RollingConfig::window_count(std::size_t n) const {
    if (n < width) return 0;
    return (n - width) / step + 1;
}

std::size_t RollingSeries::undefined_count() const {
    return static_cast<std::size_t>(
        std::count_if(points.begin(), points.end(), [](const RollingPoint& p) { return !p.defined; }));
}

std::vector<double> RollingSeries::defined_values() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        if (p.defined) out.push_back(p.value);
    }
    return out;
}

DatedSeries RollingSeries::as_dated() const {
    DatedSeries out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back({p.date, p.value});
    return out;
}

std::vector<double> values_of(std::span<const DatedValue> series) {
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) out[i] = series[i].value;
    return out;
}

DatedSeries log_returns(const ingest::PriceSeries& prices) {
    const auto& obs = prices.observations;
    if (obs.size() < 2) throw TooShort("log returns need at least 2 prices");
    DatedSeries out;
    out.reserve(obs.size() - 1);
    for (std::size_t n = 1; n < obs.size(); ++n) {
        out.push_back({obs[n].date, std::log(obs[n].value / obs[n - 1].value)});
    }
    return out;
}

RollingSeries rolling_apply(std::span<const DatedValue> series, const RollingConfig& config,
                            const WindowStatistic& statistic, Execution exec) {
    config.validate();
    if (config.width > series.size()) {
        throw WindowTooWide("width " + std::to_string(config.width) + " exceeds series length " +
                            std::to_string(series.size()));
    }
    const auto values = values_of(series);
    const auto count = static_cast<long>(config.window_count(series.size()));

    RollingSeries out;
    out.config = config;
    out.points.resize(static_cast<std::size_t>(count));

    std::exception_ptr failure;
    const bool parallel = exec == Execution::Parallel;
#pragma omp parallel for schedule(dynamic, 32) if (parallel)
    for (long k = 0; k < count; ++k) {
        const std::size_t begin = static_cast<std::size_t>(k) * config.step;
        const std::span<const double> window(values.data() + begin, config.width);
        RollingPoint point;
        point.date = series[begin + config.width - 1].date;
        try {
            const auto w = statistic(window);
            point.value = w.value;
            point.defined = w.defined;
            point.aux = w.aux;
        } catch (...) {
#pragma omp critical(entrovol_rolling_failure)
            if (!failure) failure = std::current_exception();
        }
        out.points[static_cast<std::size_t>(k)] = point;
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

double sample_std(std::span<const double> window) {
    const auto n = window.size();
    if (n < 2) throw TooShort("sample std needs at least 2 points");
    if (std::all_of(window.begin(), window.end(), [&](double v) { return v == window.front(); })) return 0.0;
    const double mean = std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : window) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

RollingSeries rolling_std(std::span<const DatedValue> series, const RollingConfig& config) {
    config.validate();
    if (config.width > series.size()) {
        throw WindowTooWide("width " + std::to_string(config.width) + " exceeds series length " +
                            std::to_string(series.size()));
    }
    const auto values = values_of(series);
    const std::size_t width = config.width;
    const std::size_t count = config.window_count(values.size());
    // Shifting by the first value keeps the running second moment well conditioned.
    const double shift = values.front();
    const auto w = static_cast<double>(width);

    RollingSeries out;
    out.config = config;
    out.points.reserve(count);

    CompensatedSum s1, s2;
    for (std::size_t i = 0; i < width; ++i) {
        const double d = values[i] - shift;
        s1.add(d);
        s2.add(d * d);
    }
    std::size_t start = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t begin = k * config.step;
        while (start < begin) {
            // slide by one: drop values[start], add values[start + width]
            const double out_d = values[start] - shift;
            const double in_d = values[start + width] - shift;
            s1.add(-out_d);
            s2.add(-out_d * out_d);
            s1.add(in_d);
            s2.add(in_d * in_d);
            ++start;
        }
        const double sum = s1.value();
        const double sumsq = s2.value();
        double ss = sumsq - sum * sum / w;
        if (!(ss > 1e-8 * sumsq)) {
            ss = -1.0;  // unreliable, recompute below
        }
        double sd;
        if (ss < 0.0) {
            sd = sample_std(std::span<const double>(values.data() + begin, width));
        } else {
            sd = std::sqrt(ss / (w - 1.0));
        }
        out.points.push_back({series[begin + width - 1].date, sd, true});
    }
    return out;
}

}  // namespace entrovol::series
