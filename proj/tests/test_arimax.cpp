#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "entrovol/arimax.hpp"
#include "entrovol/error.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace entrovol;
using namespace entrovol::arimax;

namespace {

struct Simulated {
    DatedSeries y;
    DatedSeries x;
};

// Y = beta X + eta, eta ARIMA(phi; 1; theta) with N(0, sd) innovations and a white-noise regressor.
Simulated simulate(std::size_t n, double beta, double phi, double theta, double sd, std::uint64_t seed,
                   std::size_t d = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    const auto dates = testing::weekdays(Date(2001, 1, 1), n);
    Simulated s;
    double w_prev = 0.0, e_prev = 0.0, level = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double e = sd * g(rng);
        const double w = phi * w_prev + e + theta * e_prev;
        w_prev = w;
        e_prev = e;
        level = d == 1 ? level + w : w;
        const double x = 1.5 + 0.3 * g(rng);
        s.x.push_back({dates[t], x});
        s.y.push_back({dates[t], beta * x + level});
    }
    return s;
}

std::vector<double> values(const DatedSeries& s) {
    std::vector<double> v;
    for (const auto& p : s) v.push_back(p.value);
    return v;
}

}  // namespace

TEST_CASE("ArimaxSpec") {
    CHECK(ArimaxSpec{}.label() == "ARIMA(4,1,3)");
    CHECK(packed_size({4, 1, 3, true}) == 8);
    CHECK(packed_size({1, 0, 1, true}) == 4);
    CHECK_THROWS_AS((ArimaxSpec{0, 0, 0, false}.validate()), InvalidConfig);
}

TEST_CASE("max_inverse_root") {
    const std::vector<double> ar{0.5};
    CHECK(max_inverse_root(ar, -1.0) == doctest::Approx(0.5));
    const std::vector<double> ar2{0.0, 0.81};  // 1 - 0.81 z^2: roots +-1/0.9
    CHECK(max_inverse_root(ar2, -1.0) == doctest::Approx(0.9));
    const std::vector<double> ma{1.2};
    CHECK(max_inverse_root(ma, 1.0) == doctest::Approx(1.2));
}

TEST_CASE("css objective basics") {
    const auto s = simulate(3000, 0.0, 0.5, 0.0, 1.0, 21);
    const auto yv = values(s.y), xv = values(s.x);
    const ArimaxSpec spec{1, 1, 0, true};
    const auto data = prepare(yv, xv, spec);
    REQUIRE(data.dy.size() == 2999);

    double sum = 0.0;
    for (double v : data.dy) sum += v * v;
    const std::vector<double> zero(packed_size(spec), 0.0);
    CHECK(css(zero, data) == sum);
    CHECK(css_objective(zero, data) == sum);

    auto at = [&](double phi) { return css(std::vector<double>{phi, 0.0}, data); };
    CHECK(at(0.5) <= at(0.0));
    CHECK(at(0.5) <= at(0.9));

    // The innovations agree with the textbook recursion.
    CHECK(css(std::vector<double>{0.3, 0.0}, data) ==
          doctest::Approx(testing::css_reference(yv, xv, 1, 0.0, {0.3}, {})).epsilon(1e-12));
    const ArimaxSpec arma{1, 1, 1, true};
    const auto d2 = prepare(yv, xv, arma);
    CHECK(css(std::vector<double>{0.3, -0.4, 0.01}, d2) ==
          doctest::Approx(testing::css_reference(yv, xv, 1, 0.01, {0.3}, {-0.4})).epsilon(1e-12));

    // Explosive AR is penalised but the plain CSS is not.
    const std::vector<double> bad{1.5, 0.0};
    CHECK(css_objective(bad, data) > css(bad, data));
}

TEST_CASE("recovers a regression with ARIMA(1,1,0) errors") {
    const auto s = simulate(5000, -0.003, 0.5, 0.0, 0.005, 42);
    const auto fit = fit_regression_arima_errors(s.y, s.x, {1, 1, 0, true});
    CHECK(std::fabs(fit.phi[0] - 0.5) <= 0.05);
    CHECK(std::fabs(fit.beta + 0.003) <= 0.0005);
    CHECK(fit.residuals.size() == 4999);
    CHECK(fit.coef_names == std::vector<std::string>{"ar1", "xreg"});
    CHECK(fit.sigma2 == doctest::Approx(0.005 * 0.005).epsilon(0.05));
    CHECK(fit.aicc > fit.aic);
    for (double se : fit.se) CHECK(se > 0.0);
}

TEST_CASE("white-noise regression equals OLS") {
    const auto s = simulate(800, 2.0, 0.0, 0.0, 0.7, 5, 0);
    const auto fit = fit_regression_arima_errors(s.y, s.x, {0, 0, 0, true});
    const auto yv = values(s.y), xv = values(s.x);
    const double mx = std::accumulate(xv.begin(), xv.end(), 0.0) / xv.size();
    const double my = std::accumulate(yv.begin(), yv.end(), 0.0) / yv.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) {
        sxy += (xv[i] - mx) * (yv[i] - my);
        sxx += (xv[i] - mx) * (xv[i] - mx);
    }
    CHECK(std::fabs(fit.beta - sxy / sxx) <= 1e-6);
    CHECK(std::fabs(fit.intercept - (my - sxy / sxx * mx)) <= 1e-6);
}

TEST_CASE("ARIMA(1,1,1) without regressor matches a grid search") {
    const auto s = simulate(1500, 0.0, 0.6, 0.3, 1.0, 77);
    const auto fit = fit_regression_arima_errors(s.y, s.x, {1, 1, 1, false});
    const auto yv = values(s.y);
    const std::vector<double> zeros(yv.size(), 0.0);
    double best = std::numeric_limits<double>::infinity();
    double bphi = 0.0, btheta = 0.0;
    for (int i = -95; i <= 95; ++i) {
        for (int j = -95; j <= 95; ++j) {
            const double v = testing::css_reference(yv, zeros, 1, 0.0, {i / 100.0}, {j / 100.0});
            if (v < best) best = v, bphi = i / 100.0, btheta = j / 100.0;
        }
    }
    CHECK(std::fabs(fit.phi[0] - bphi) <= 0.01);
    CHECK(std::fabs(fit.theta[0] - btheta) <= 0.01);
    CHECK(fit.css <= best * (1.0 + 1e-12));
    CHECK(fit.beta == 0.0);
}

TEST_CASE("fit is no worse than random valid parameters") {
    const auto s = simulate(1200, -0.01, 0.4, -0.2, 0.01, 90);
    const ArimaxSpec spec{1, 1, 1, true};
    const auto fit = fit_regression_arima_errors(s.y, s.x, spec);
    const auto data = prepare(values(s.y), values(s.x), spec);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coef(-0.9, 0.9), beta(-0.05, 0.05);
    for (int t = 0; t < 100; ++t) {
        const std::vector<double> p{coef(rng), coef(rng), beta(rng)};
        CHECK(fit.css <= css(p, data));
    }
}

TEST_CASE("fits and forecasts are deterministic") {
    const auto s = simulate(600, -0.02, 0.3, 0.2, 0.02, 8);
    const ArimaxSpec spec{2, 1, 1, true};
    const auto a = fit_regression_arima_errors(s.y, s.x, spec);
    const auto b = fit_regression_arima_errors(s.y, s.x, spec, {40000, 20230410, false});
    CHECK(a.coef == b.coef);
    CHECK(a.aic == doctest::Approx(b.aic).epsilon(1e-12));
    const auto f1 = forecast(a, 25);
    const auto f2 = forecast(a, 25);
    for (std::size_t i = 0; i < 25; ++i) {
        CHECK(f1.steps[i].point == f2.steps[i].point);
        CHECK(f1.steps[i].hi95 == f2.steps[i].hi95);
    }
}

TEST_CASE("forecast bands") {
    const auto s = simulate(800, -0.02, 0.5, 0.0, 0.02, 12);
    const auto fit = fit_regression_arima_errors(s.y, s.x, {1, 1, 0, true});
    const auto f = forecast(fit, 300);
    REQUIRE(f.steps.size() == 300);
    CHECK(f.held_at_mean);
    const auto xv = values(s.x);
    const double mean_x = std::accumulate(xv.begin(), xv.end(), 0.0) / xv.size();
    double prev_se = 0.0;
    for (const auto& st : f.steps) {
        CHECK(st.x == doctest::Approx(mean_x));
        CHECK(st.lo95 <= st.lo80);
        CHECK(st.lo80 <= st.point);
        CHECK(st.point <= st.hi80);
        CHECK(st.hi80 <= st.hi95);
        CHECK(st.se >= prev_se);
        prev_se = st.se;
    }
    const std::vector<double> fx(300, 2.0);
    const auto g = forecast(fit, 300, std::span<const double>(fx));
    CHECK_FALSE(g.held_at_mean);
    CHECK(g.steps[0].point - f.steps[0].point == doctest::Approx(fit.beta * (2.0 - mean_x)));

    CHECK_THROWS_AS(forecast(fit, 0), HorizonZero);
    CHECK_THROWS_AS(forecast(fit, 10, std::span<const double>(fx)), LengthMismatch);
}

TEST_CASE("degenerate ARMA forecast is the regression line") {
    const auto s = simulate(400, 2.0, 0.0, 0.0, 0.5, 31, 0);
    const auto fit = fit_regression_arima_errors(s.y, s.x, {0, 0, 0, true});
    const auto f = forecast(fit, 1);
    const auto xv = values(s.x);
    const double mean_x = std::accumulate(xv.begin(), xv.end(), 0.0) / xv.size();
    const double z95 = boost::math::quantile(boost::math::normal(), 0.975);
    CHECK(f.steps[0].point == doctest::Approx(fit.beta * mean_x + fit.intercept).epsilon(1e-12));
    CHECK(f.steps[0].hi95 - f.steps[0].point == doctest::Approx(z95 * std::sqrt(fit.sigma2)).epsilon(1e-12));
}

TEST_CASE("psi weights") {
    ArimaxFit rw;
    rw.spec = {0, 1, 0, true};
    for (double v : psi_weights(rw, 10)) CHECK(v == 1.0);

    ArimaxFit ar;
    ar.spec = {1, 0, 0, true};
    ar.phi = {0.6};
    const auto p = psi_weights(ar, 6);
    for (std::size_t j = 0; j < p.size(); ++j) CHECK(p[j] == doctest::Approx(std::pow(0.6, j)));

    ArimaxFit ma;
    ma.spec = {0, 1, 1, true};
    ma.theta = {0.4};
    const auto q = psi_weights(ma, 4);
    CHECK(q[0] == 1.0);
    for (std::size_t j = 1; j < q.size(); ++j) CHECK(q[j] == doctest::Approx(1.4));
}

TEST_CASE("residual diagnostics") {
    int accept = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto s = simulate(300, 1.0, 0.0, 0.0, 1.0, 500 + rep, 0);
        const auto fit = fit_regression_arima_errors(s.y, s.x, {0, 0, 0, true});
        accept += residual_diagnostics(fit, 10).ljung_box.p_value > 0.05;
    }
    CHECK(accept >= 180);

    const auto s = simulate(300, 1.0, 0.3, 0.0, 1.0, 2);
    const auto fit = fit_regression_arima_errors(s.y, s.x, {4, 1, 3, true});
    const auto diag = residual_diagnostics(fit, 10);
    CHECK(diag.ljung_box.df_or_lags == 3);
    CHECK(diag.acf.max_lag() == 30);
    std::size_t total = 0;
    for (const auto& b : diag.histogram) total += b.count;
    CHECK(total == fit.residuals.size());
    CHECK_THROWS_AS(residual_diagnostics(fit, 7), InvalidDf);

    ArimaxFit zero = fit;
    for (auto& r : zero.residuals) r.value = 0.0;
    const auto z = residual_diagnostics(zero, 10);
    CHECK(z.degenerate);
    CHECK_FALSE(z.message.empty());
}

TEST_CASE("input validation") {
    auto s = simulate(200, 1.0, 0.2, 0.0, 1.0, 3);
    auto shifted = s.x;
    shifted[10].date = shifted[10].date + 1;
    CHECK_THROWS_AS(fit_regression_arima_errors(s.y, shifted, {1, 1, 0, true}), LengthMismatch);
    CHECK_THROWS_AS(fit_regression_arima_errors(std::span(s.y).first(5), std::span(s.x).first(5), {4, 1, 3, true}),
                    TooShort);
    for (auto& p : s.y) p.value = 3.0;
    CHECK_THROWS_AS(fit_regression_arima_errors(s.y, s.x, {1, 1, 0, true}), SingularFit);
}

TEST_CASE("order selection by AICc") {
    const auto s = simulate(600, -0.01, 0.6, 0.0, 0.01, 64);
    const auto sel = select_order(s.y, s.x, 1, 1);
    CHECK(sel.candidates.size() == 8);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : sel.candidates) {
        if (c.ok) best = std::min(best, c.aicc);
    }
    CHECK(sel.best.aicc == best);
}
