#include "entrovol/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "entrovol/error.hpp"

namespace entrovol::entropy {

namespace {

void check_window(std::span<const double> window, std::size_t m, double r) {
    if (m < 1) throw InvalidConfig("embedding dimension m must be >= 1");
    if (window.size() < m + 2) {
        throw SeriesTooShort("window of " + std::to_string(window.size()) + " points is too short for m = " +
                             std::to_string(m));
    }
    if (!(r > 0.0)) throw DegenerateTolerance("tolerance must be > 0");
}

double resolve_tolerance(std::span<const double> window, const SampEnParams& params) {
    if (params.tolerance.kind == ToleranceRule::Kind::Absolute) return params.tolerance.value;
    if (window.size() < 2) throw SeriesTooShort("window too short for a std-relative tolerance");
    const double sd = series::sample_std(window);
    if (!(sd > 0.0)) throw DegenerateTolerance("std-relative tolerance on a constant window");
    return params.tolerance.value * sd;
}

SampEnResult finish(MatchCounts counts, double r) {
    SampEnResult res;
    res.counts = counts;
    res.effective_r = r;
    if (counts.a_pairs > 0 && counts.b_pairs > 0) {
        res.defined = true;
        res.value = -std::log(static_cast<double>(counts.a_pairs) / static_cast<double>(counts.b_pairs));
    }
    return res;
}

}  // namespace

void SampEnParams::validate() const {
    if (m < 1) throw InvalidConfig("embedding dimension m must be >= 1");
    if (!(tolerance.value > 0.0)) throw InvalidConfig("tolerance must be > 0");
}

double chebyshev_distance(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size() || u.empty()) {
        throw LengthMismatch("chebyshev distance needs equal, positive lengths (" + std::to_string(u.size()) +
                             " vs " + std::to_string(v.size()) + ")");
    }
    double d = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) d = std::max(d, std::fabs(u[k] - v[k]));
    return d;
}

MatchCounts count_matches(std::span<const double> window, std::size_t m, double r) {
    check_window(window, m, r);
    const std::size_t templates = window.size() - m;
    const double* x = window.data();
    std::uint64_t b = 0, a = 0;
    for (std::size_t i = 0; i + 1 < templates; ++i) {
        for (std::size_t j = i + 1; j < templates; ++j) {
            std::size_t k = 0;
            while (k < m && std::fabs(x[i + k] - x[j + k]) <= r) ++k;
            if (k < m) continue;
            ++b;
            if (std::fabs(x[i + m] - x[j + m]) <= r) ++a;
        }
    }
    // each unordered pair stands for (i, j) and (j, i)
    return {2 * b, 2 * a, templates};
}

MatchCounts count_matches_naive(std::span<const double> window, std::size_t m, double r) {
    check_window(window, m, r);
    const std::size_t templates = window.size() - m;
    auto embed = [&](std::size_t len) {
        std::vector<std::vector<double>> out;
        for (std::size_t i = 0; i < templates; ++i) {
            out.emplace_back(window.begin() + static_cast<std::ptrdiff_t>(i),
                             window.begin() + static_cast<std::ptrdiff_t>(i + len));
        }
        return out;
    };
    const auto ym = embed(m);
    const auto ym1 = embed(m + 1);
    MatchCounts counts;
    counts.templates = templates;
    for (std::size_t i = 0; i < templates; ++i) {
        for (std::size_t j = 0; j < templates; ++j) {
            if (i == j) continue;
            if (chebyshev_distance(ym[i], ym[j]) <= r) ++counts.b_pairs;
            if (chebyshev_distance(ym1[i], ym1[j]) <= r) ++counts.a_pairs;
        }
    }
    return counts;
}

SampEnResult sample_entropy(std::span<const double> window, const SampEnParams& params) {
    params.validate();
    const double r = resolve_tolerance(window, params);
    return finish(count_matches(window, params.m, r), r);
}

SampEnResult sample_entropy_naive(std::span<const double> window, const SampEnParams& params) {
    params.validate();
    const double r = resolve_tolerance(window, params);
    return finish(count_matches_naive(window, params.m, r), r);
}

series::RollingSeries rolling_sample_entropy(std::span<const DatedValue> series,
                                             const series::RollingConfig& config,
                                             const SampEnParams& params, series::Execution exec) {
    params.validate();
    config.validate();
    if (config.width < params.m + 2) {
        throw InvalidConfig("window width " + std::to_string(config.width) + " too small for m = " +
                            std::to_string(params.m));
    }
    auto statistic = [&params](std::span<const double> window) {
        series::WindowValue out;
        try {
            const auto res = sample_entropy(window, params);
            out.value = res.value;
            out.defined = res.defined;
            out.aux = res.effective_r;
        } catch (const DegenerateTolerance&) {
            out.defined = false;
        }
        return out;
    };
    return series::rolling_apply(series, config, statistic, exec);
}

}  // namespace entrovol::entropy
