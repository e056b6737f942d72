#include "entrovol/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "entrovol/date.hpp"

namespace entrovol::svg {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
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

std::string tick_label(double v) {
    char buf[64];
    if (v != 0.0 && (std::fabs(v) < 1e-3 || std::fabs(v) >= 1e5)) {
        std::snprintf(buf, sizeof buf, "%.2e", v);
    } else {
        std::snprintf(buf, sizeof buf, "%.4g", v);
    }
    return buf;
}

struct Box {
    double x = 0, y = 0, w = 0, h = 0;
};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi == lo) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

// Nice tick step (1, 2, 5 x 10^k) giving about `target` ticks.
double nice_step(double span, int target) {
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    const double nice = norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0;
    return nice * mag;
}

class Plot {
public:
    Plot(std::string& out, Box box, Range xr, Range yr) : out_(out), box_(box), xr_(xr), yr_(yr) {}

    double px(double x) const { return box_.x + (x - xr_.lo) / (xr_.hi - xr_.lo) * box_.w; }
    double py(double y) const { return box_.y + box_.h - (y - yr_.lo) / (yr_.hi - yr_.lo) * box_.h; }

    void frame(const std::string& title, const std::string& x_label, const std::string& y_label, bool dates) {
        out_ += "<rect x=\"" + fmt(box_.x) + "\" y=\"" + fmt(box_.y) + "\" width=\"" + fmt(box_.w) + "\" height=\"" +
                fmt(box_.h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
        out_ += "<text x=\"" + fmt(box_.x + box_.w / 2) + "\" y=\"" + fmt(box_.y - 8) +
                "\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) + "</text>\n";
        if (!x_label.empty()) {
            out_ += "<text x=\"" + fmt(box_.x + box_.w / 2) + "\" y=\"" + fmt(box_.y + box_.h + 34) +
                    "\" text-anchor=\"middle\" font-size=\"12\">" + escape(x_label) + "</text>\n";
        }
        if (!y_label.empty()) {
            const double cx = box_.x - 52, cy = box_.y + box_.h / 2;
            out_ += "<text x=\"" + fmt(cx) + "\" y=\"" + fmt(cy) + "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " +
                    fmt(cx) + " " + fmt(cy) + ")\">" + escape(y_label) + "</text>\n";
        }
        // y ticks
        const double ys = nice_step(yr_.hi - yr_.lo, 5);
        for (double v = std::ceil(yr_.lo / ys) * ys; v <= yr_.hi + 1e-12 * ys; v += ys) {
            const double y = py(v);
            out_ += "<line x1=\"" + fmt(box_.x - 4) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(box_.x) + "\" y2=\"" + fmt(y) +
                    "\" stroke=\"#444\"/>\n";
            out_ += "<text x=\"" + fmt(box_.x - 6) + "\" y=\"" + fmt(y + 4) + "\" text-anchor=\"end\" font-size=\"10\">" +
                    tick_label(std::fabs(v) < 1e-12 * ys ? 0.0 : v) + "</text>\n";
        }
        // x ticks
        if (dates) {
            const int y0 = static_cast<int>(Date(1970, 1, 1).ymd().year()) +
                           static_cast<int>(std::floor(xr_.lo / 365.2425));
            const int y1 = y0 + static_cast<int>(std::ceil((xr_.hi - xr_.lo) / 365.2425)) + 1;
            const int every = std::max(1, (y1 - y0) / 8);
            for (int y = y0; y <= y1; ++y) {
                if (y % every != 0) continue;
                const double d = static_cast<double>(Date(y, 1, 1).days_since_epoch());
                if (d < xr_.lo || d > xr_.hi) continue;
                x_tick(d, std::to_string(y));
            }
        } else {
            const double xs = nice_step(xr_.hi - xr_.lo, 8);
            for (double v = std::ceil(xr_.lo / xs) * xs; v <= xr_.hi + 1e-12 * xs; v += xs) x_tick(v, tick_label(v));
        }
    }

    void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& color) {
        std::string d;
        bool pen_down = false;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!std::isfinite(ys[i])) {
                pen_down = false;
                continue;
            }
            d += pen_down ? "L" : "M";
            d += fmt(px(xs[i])) + " " + fmt(py(ys[i]));
            pen_down = true;
        }
        out_ += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1\"/>\n";
    }

    void band(const Band& b) {
        std::string d;
        for (std::size_t i = 0; i < b.xs.size(); ++i) d += (i == 0 ? "M" : "L") + fmt(px(b.xs[i])) + " " + fmt(py(b.hi[i]));
        for (std::size_t i = b.xs.size(); i-- > 0;) d += "L" + fmt(px(b.xs[i])) + " " + fmt(py(b.lo[i]));
        d += "Z";
        out_ += "<path d=\"" + d + "\" fill=\"" + b.color + "\" fill-opacity=\"" + fmt(b.opacity) + "\" stroke=\"none\"/>\n";
    }

    void hline(double y, const std::string& style) {
        out_ += "<line x1=\"" + fmt(box_.x) + "\" y1=\"" + fmt(py(y)) + "\" x2=\"" + fmt(box_.x + box_.w) + "\" y2=\"" +
                fmt(py(y)) + "\" " + style + "/>\n";
    }

    void rect(double x0, double y0, double x1, double y1, const std::string& fill) {
        const double left = px(x0), right = px(x1);
        const double top = py(std::max(y0, y1)), bottom = py(std::min(y0, y1));
        out_ += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(std::max(right - left, 0.5)) +
                "\" height=\"" + fmt(bottom - top) + "\" fill=\"" + fill + "\"/>\n";
    }

    void legend(const std::vector<Line>& lines) {
        double y = box_.y + 14;
        for (const auto& l : lines) {
            if (l.label.empty()) continue;
            out_ += "<line x1=\"" + fmt(box_.x + box_.w - 150) + "\" y1=\"" + fmt(y - 4) + "\" x2=\"" +
                    fmt(box_.x + box_.w - 130) + "\" y2=\"" + fmt(y - 4) + "\" stroke=\"" + l.color + "\"/>\n";
            out_ += "<text x=\"" + fmt(box_.x + box_.w - 125) + "\" y=\"" + fmt(y) + "\" font-size=\"11\">" +
                    escape(l.label) + "</text>\n";
            y += 14;
        }
    }

private:
    void x_tick(double v, const std::string& label) {
        const double x = px(v);
        out_ += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(box_.y + box_.h) + "\" x2=\"" + fmt(x) + "\" y2=\"" +
                fmt(box_.y + box_.h + 4) + "\" stroke=\"#444\"/>\n";
        out_ += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(box_.y + box_.h + 16) + "\" text-anchor=\"middle\" font-size=\"10\">" +
                label + "</text>\n";
    }

    std::string& out_;
    Box box_;
    Range xr_, yr_;
};

std::string open_document(int width, int height) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(width) + "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
           " " + std::to_string(height) + "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void draw_line_chart(std::string& out, const LineChart& chart, Box box) {
    Range xr, yr;
    for (const auto& l : chart.lines) {
        for (double v : l.xs) xr.add(v);
        for (double v : l.ys) yr.add(v);
    }
    for (const auto& b : chart.bands) {
        for (double v : b.xs) xr.add(v);
        for (double v : b.lo) yr.add(v);
        for (double v : b.hi) yr.add(v);
    }
    xr.finish();
    yr.finish();
    const double pad = 0.05 * (yr.hi - yr.lo);
    yr.lo -= pad;
    yr.hi += pad;
    Plot plot(out, box, xr, yr);
    plot.frame(chart.title, chart.x_label, chart.y_label, chart.dates);
    for (const auto& b : chart.bands) plot.band(b);
    for (const auto& l : chart.lines) plot.polyline(l.xs, l.ys, l.color);
    plot.legend(chart.lines);
}

}  // namespace

std::string line_chart(const LineChart& chart, int width, int height) {
    std::string out = open_document(width, height);
    draw_line_chart(out, chart, {80.0, 40.0, width - 110.0, height - 90.0});
    out += "</svg>\n";
    return out;
}

std::string residual_panels(const std::string& title, const LineChart& trace, const std::vector<double>& acf,
                            std::size_t n, const std::vector<arimax::HistogramBin>& histogram, int width, int height) {
    std::string out = open_document(width, height);
    out += "<text x=\"" + fmt(width / 2.0) + "\" y=\"18\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
           "</text>\n";
    const double top_h = height * 0.42;
    draw_line_chart(out, trace, {80.0, 50.0, width - 110.0, top_h - 40.0});

    const double bottom_y = top_h + 60.0;
    const double bottom_h = height - bottom_y - 50.0;
    const double half_w = (width - 190.0) / 2.0;

    {
        Range xr, yr;
        xr.add(0.5);
        xr.add(static_cast<double>(acf.size()) + 0.5);
        const double bound = n > 0 ? 1.96 / std::sqrt(static_cast<double>(n)) : 0.0;
        yr.add(-bound * 1.2);
        yr.add(bound * 1.2);
        for (double v : acf) yr.add(v);
        yr.finish();
        Plot plot(out, {80.0, bottom_y, half_w, bottom_h}, xr, yr);
        plot.frame("ACF", "lag", "", false);
        plot.hline(0.0, "stroke=\"#444\"");
        plot.hline(bound, "stroke=\"#1f77b4\" stroke-dasharray=\"4 3\"");
        plot.hline(-bound, "stroke=\"#1f77b4\" stroke-dasharray=\"4 3\"");
        for (std::size_t k = 0; k < acf.size(); ++k) {
            const double lag = static_cast<double>(k + 1);
            plot.rect(lag - 0.15, 0.0, lag + 0.15, acf[k], "#333");
        }
    }
    {
        Range xr, yr;
        yr.add(0.0);
        for (const auto& b : histogram) {
            xr.add(b.lo);
            xr.add(b.hi);
            yr.add(static_cast<double>(b.count));
        }
        xr.finish();
        yr.finish();
        Plot plot(out, {80.0 + half_w + 80.0, bottom_y, half_w, bottom_h}, xr, yr);
        plot.frame("Histogram", "residual", "count", false);
        for (const auto& b : histogram) plot.rect(b.lo, 0.0, b.hi, static_cast<double>(b.count), "#7f7f7f");
    }
    out += "</svg>\n";
    return out;
}

}  // namespace entrovol::svg
