#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "entrovol/ingest.hpp"

namespace entrovol::series {

enum class Execution { Serial, Parallel };

struct RollingConfig {
    std::size_t width = 252;
    std::size_t step = 1;

    /// Throws InvalidConfig unless width >= 2 and step >= 1.
    void validate() const;
    /// floor((n - width) / step) + 1, or 0 when n < width.
    std::size_t window_count(std::size_t n) const;
};

/// Value of a statistic over one window. Undefined windows keep a NaN value.
struct WindowValue {
    double value = std::numeric_limits<double>::quiet_NaN();
    bool defined = false;
    double aux = std::numeric_limits<double>::quiet_NaN();  // e.g. effective tolerance
};

struct RollingPoint {
    Date date;  // right edge of the window
    double value = 0.0;
    bool defined = true;
    double aux = std::numeric_limits<double>::quiet_NaN();
};

struct RollingSeries {
    std::vector<RollingPoint> points;
    RollingConfig config;

    std::size_t size() const { return points.size(); }
    std::size_t undefined_count() const;
    /// Values of defined points only, in order.
    std::vector<double> defined_values() const;
    DatedSeries as_dated() const;
};

using WindowStatistic = std::function<WindowValue(std::span<const double>)>;

/// R_n = ln(P_n / P_{n-1}), dated by the later price. Throws TooShort.
DatedSeries log_returns(const ingest::PriceSeries& prices);

/// Window k covers [k*step, k*step + width) and is labelled by its last date.
/// The statistic must be pure: with Execution::Parallel windows are evaluated
/// concurrently and assembled in window order. Throws WindowTooWide.
RollingSeries rolling_apply(std::span<const DatedValue> series, const RollingConfig& config,
                            const WindowStatistic& statistic,
                            Execution exec = Execution::Parallel);

/// Two-pass sample standard deviation (divisor n - 1).
double sample_std(std::span<const double> window);

/// Rolling sample std using compensated running sums, falling back to a
/// two-pass recomputation when cancellation makes the streaming value unreliable.
RollingSeries rolling_std(std::span<const DatedValue> series, const RollingConfig& config);

std::vector<double> values_of(std::span<const DatedValue> series);

}  // namespace entrovol::series
