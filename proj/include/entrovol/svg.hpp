#pragma once

#include <string>
#include <vector>

#include "entrovol/arimax.hpp"

namespace entrovol::svg {

struct Line {
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
    std::string color = "#1f77b4";
};

struct Band {
    std::vector<double> xs;
    std::vector<double> lo;
    std::vector<double> hi;
    std::string color = "#9ecae1";
    double opacity = 0.5;
};

/// x values are days since 1970-01-01 when `dates` is set (ticks become years).
struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool dates = true;
    std::vector<Band> bands;
    std::vector<Line> lines;
};

/// Every renderer emits one path command per data point ("M" then "L").
/// Output depends only on the inputs (no timestamps, fixed number formatting).
std::string line_chart(const LineChart& chart, int width = 900, int height = 420);

/// Residual trace, ACF bars with +-1.96/sqrt(n) guides, and histogram in one document.
std::string residual_panels(const std::string& title, const LineChart& trace, const std::vector<double>& acf,
                            std::size_t n, const std::vector<arimax::HistogramBin>& histogram, int width = 900,
                            int height = 640);

}  // namespace entrovol::svg
