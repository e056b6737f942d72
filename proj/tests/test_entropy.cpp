#include <doctest.h>

#include <cmath>
#include <random>

#include "entrovol/entropy.hpp"
#include "entrovol/error.hpp"
#include "support/synthetic.hpp"

using namespace entrovol;
using namespace entrovol::entropy;

namespace {

// Values on a 1/64 grid so that shifts and power-of-two scalings are exact.
std::vector<double> dyadic_window(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> d(-40, 40);
    std::vector<double> w(n);
    for (auto& v : w) v = d(rng) / 64.0;
    return w;
}

}  // namespace

TEST_CASE("chebyshev_distance") {
    const std::vector<double> u{1, 5, 2}, v{2, 3, 2};
    CHECK(chebyshev_distance(u, u) == 0.0);
    CHECK(chebyshev_distance(u, v) == 2.0);
    CHECK_THROWS_AS(chebyshev_distance(u, std::span(v).first(2)), LengthMismatch);
    CHECK_THROWS_AS(chebyshev_distance(std::span<const double>(), std::span<const double>()), LengthMismatch);

    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> a(4), b(4), c(4);
        for (int i = 0; i < 4; ++i) a[i] = g(rng), b[i] = g(rng), c[i] = g(rng);
        CHECK(chebyshev_distance(a, b) == chebyshev_distance(b, a));
        CHECK(chebyshev_distance(a, c) <= chebyshev_distance(a, b) + chebyshev_distance(b, c) + 1e-15);
    }
}

TEST_CASE("count_matches hand cases") {
    const std::vector<double> alt{1, 2, 1, 2, 1, 2, 1, 2, 1, 2};
    const auto c = count_matches(alt, 2, 0.5);
    CHECK(c.b_pairs == 24);
    CHECK(c.a_pairs == 24);
    CHECK(c.templates == 8);
    CHECK(count_matches_naive(alt, 2, 0.5) == c);
    const auto s = sample_entropy(alt, {2, ToleranceRule::absolute(0.5)});
    CHECK(s.defined);
    CHECK(s.value == 0.0);

    for (std::size_t m : {1u, 2u, 3u}) {
        const std::vector<double> flat(20, 3.0);
        const auto f = count_matches(flat, m, 0.1);
        CHECK(f.b_pairs == (20 - m) * (19 - m));
        CHECK(f.a_pairs == f.b_pairs);
        const auto r = sample_entropy(flat, {m, ToleranceRule::absolute(0.1)});
        CHECK(r.defined);
        CHECK(r.value == 0.0);
    }
}

TEST_CASE("closed ball: distance equal to r matches") {
    const std::vector<double> w{0, 1, 0, 1, 0};
    CHECK(count_matches(w, 1, 1.0).b_pairs == 4 * 3);
    CHECK(count_matches(w, 1, 0.999).b_pairs == 4);
}

TEST_CASE("optimized counts equal the naive oracle on 200 random windows") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> len(5, 60);
    const double fractions[] = {0.1, 0.2, 0.5};
    for (int t = 0; t < 200; ++t) {
        const std::size_t m = 1 + t % 3;
        const std::size_t n = std::max<std::size_t>(len(rng), m + 2);
        const auto w = dyadic_window(rng, n);
        for (double f : fractions) {
            const SampEnParams p{m, ToleranceRule::relative(f)};
            SampEnResult fast, slow;
            try {
                fast = sample_entropy(w, p);
            } catch (const DegenerateTolerance&) {
                CHECK_THROWS_AS(sample_entropy_naive(w, p), DegenerateTolerance);
                continue;
            }
            slow = sample_entropy_naive(w, p);
            CHECK(fast.counts == slow.counts);
            CHECK(fast.effective_r == slow.effective_r);
            CHECK(fast.defined == slow.defined);
            CHECK(fast.counts.a_pairs <= fast.counts.b_pairs);
            if (fast.defined) {
                CHECK(std::fabs(fast.value - slow.value) <= 1e-12);
                CHECK(fast.value >= 0.0);
            }
        }
    }
}

TEST_CASE("translation and scale invariance are exact") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 50; ++t) {
        const auto w = dyadic_window(rng, 40);
        const double r = 0.25;
        const auto base = count_matches(w, 2, r);
        auto shifted = w;
        for (auto& v : shifted) v += 3.0;
        CHECK(count_matches(shifted, 2, r) == base);
        auto scaled = w;
        for (auto& v : scaled) v *= 4.0;
        CHECK(count_matches(scaled, 2, 4.0 * r) == base);

        SampEnResult a, b;
        try {
            a = sample_entropy(w, {2, ToleranceRule::relative(0.2)});
        } catch (const DegenerateTolerance&) {
            continue;
        }
        b = sample_entropy(scaled, {2, ToleranceRule::relative(0.2)});
        CHECK(a.counts == b.counts);
        CHECK(b.effective_r == 4.0 * a.effective_r);
    }
}

TEST_CASE("match counts are monotone in r") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 30; ++t) {
        const auto w = dyadic_window(rng, 50);
        MatchCounts prev{};
        for (double r : {0.01, 0.05, 0.1, 0.2, 0.4, 0.8}) {
            const auto c = count_matches(w, 2, r);
            CHECK(c.b_pairs >= prev.b_pairs);
            CHECK(c.a_pairs >= prev.a_pairs);
            prev = c;
        }
    }
}

TEST_CASE("undefined and invalid inputs") {
    const std::vector<double> spread{0, 10, 20, 30, 40, 50, 60};
    const auto r = sample_entropy(spread, {2, ToleranceRule::absolute(1.0)});
    CHECK_FALSE(r.defined);
    CHECK(std::isnan(r.value));

    const std::vector<double> flat(10, 1.0);
    CHECK_THROWS_AS(sample_entropy(flat, {2, ToleranceRule::relative(0.2)}), DegenerateTolerance);
    CHECK_THROWS_AS(sample_entropy(std::span(spread).first(3), {2, ToleranceRule::absolute(1.0)}), SeriesTooShort);
    CHECK_THROWS_AS(SampEnParams({0, ToleranceRule::absolute(1.0)}).validate(), InvalidConfig);
}

TEST_CASE("rolling_sample_entropy flags undefined windows and repeats values") {
    auto v = testing::white_noise(400, 13);
    for (std::size_t i = 100; i < 160; ++i) v[i] = 0.5;  // constant stretch
    // Copy a block verbatim further along.
    for (std::size_t i = 0; i < 40; ++i) v[300 + i] = v[20 + i];
    const auto series = testing::dated(v);
    const series::RollingConfig cfg{40, 1};
    const auto s = rolling_sample_entropy(series, cfg, {}, series::Execution::Serial);
    const auto p = rolling_sample_entropy(series, cfg, {}, series::Execution::Parallel);
    REQUIRE(s.size() == cfg.window_count(v.size()));
    CHECK(s.undefined_count() > 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s.points[i].defined == p.points[i].defined);
        if (s.points[i].defined) CHECK(s.points[i].value == p.points[i].value);
    }
    // Window starting at 100 is the constant stretch.
    CHECK_FALSE(s.points[100].defined);
    const auto& first = s.points[20];
    const auto& copy = s.points[300];
    REQUIRE(first.defined == copy.defined);
    if (first.defined) CHECK(first.value == copy.value);
    CHECK(first.aux == copy.aux);
}
