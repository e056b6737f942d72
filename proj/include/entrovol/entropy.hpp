#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

#include "entrovol/series.hpp"

namespace entrovol::entropy {

/// Matching radius: either an absolute r or a fraction of the window's sample std.
struct ToleranceRule {
    enum class Kind { Absolute, RelativeToStd };

    Kind kind = Kind::RelativeToStd;
    double value = 0.2;

    static ToleranceRule absolute(double r) { return {Kind::Absolute, r}; }
    static ToleranceRule relative(double fraction) { return {Kind::RelativeToStd, fraction}; }
};

struct SampEnParams {
    std::size_t m = 2;
    ToleranceRule tolerance{};

    void validate() const;
};

/// Ordered template-pair counts, self-pairs excluded. Both lengths draw
/// start indices from the same N - m templates.
struct MatchCounts {
    std::uint64_t b_pairs = 0;  // length m
    std::uint64_t a_pairs = 0;  // length m + 1
    std::uint64_t templates = 0;

    bool operator==(const MatchCounts&) const = default;
};

struct SampEnResult {
    double value = std::numeric_limits<double>::quiet_NaN();  // nats; NaN when undefined
    bool defined = false;
    MatchCounts counts;
    double effective_r = 0.0;
};

/// max_k |u_k - v_k|. Throws LengthMismatch on unequal or empty inputs.
double chebyshev_distance(std::span<const double> u, std::span<const double> v);

/// Joint single-pass counter with early exit. Requires N >= m + 2 and r > 0.
MatchCounts count_matches(std::span<const double> window, std::size_t m, double r);

/// Literal construction: materialise every template and compare all ordered pairs.
MatchCounts count_matches_naive(std::span<const double> window, std::size_t m, double r);

/// -ln(a/b), undefined when either count is zero. Throws SeriesTooShort or
/// DegenerateTolerance (relative rule on a constant window).
SampEnResult sample_entropy(std::span<const double> window, const SampEnParams& params);
SampEnResult sample_entropy_naive(std::span<const double> window, const SampEnParams& params);

/// Rolling SampEn; each window resolves its own tolerance. Windows whose SampEn is
/// undefined (no matches, or zero std under the relative rule) are flagged, not dropped.
/// `aux` of each point carries the effective r.
series::RollingSeries rolling_sample_entropy(std::span<const DatedValue> series,
                                             const series::RollingConfig& config,
                                             const SampEnParams& params,
                                             series::Execution exec = series::Execution::Parallel);

}  // namespace entrovol::entropy
