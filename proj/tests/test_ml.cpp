#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "entrovol/error.hpp"
#include "entrovol/ml.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace entrovol;
using namespace entrovol::ml;

namespace {

SupervisedSet make_set(const std::vector<double>& x, const std::vector<double>& y) {
    SupervisedSet s;
    s.x = x;
    s.y = y;
    s.dates = testing::weekdays(Date(2010, 1, 4), x.size());
    return s;
}

// Noisy negative relation, roughly the shape of std against SampEn.
SupervisedSet noisy_set(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = 1.8 + 0.3 * g(rng);
        y[i] = 0.02 + 0.01 * std::exp(-2.0 * (x[i] - 1.2)) + 0.002 * std::fabs(g(rng));
    }
    return make_set(x, y);
}

}  // namespace

TEST_CASE("chrono_split") {
    const auto big = noisy_set(9137, 1);
    const auto s = chrono_split(big, 0.8);
    CHECK(s.train.size() == 7309);
    CHECK(s.test.size() == 1828);
    CHECK(s.train.dates.back() < s.test.dates.front());

    const auto small = chrono_split(noisy_set(10, 2), 0.8);
    CHECK(small.train.size() == 8);
    CHECK(small.test.size() == 2);

    CHECK_THROWS_AS(chrono_split(noisy_set(9, 2), 0.8), TooShort);
    CHECK_THROWS_AS(chrono_split(big, 1.0), InvalidConfig);
    CHECK_THROWS_AS(chrono_split(big, 0.0), InvalidConfig);

    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(10, 500)(rng);
        const double ratio = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
        const auto sp = chrono_split(noisy_set(n, t), ratio);
        if (sp.train.size() && sp.test.size()) CHECK(sp.train.dates.back() < sp.test.dates.front());
        CHECK(sp.train.size() + sp.test.size() == n);
    }
}

TEST_CASE("build_supervised skips undefined windows") {
    series::RollingSeries target, feature;
    const auto dates = testing::weekdays(Date(2020, 1, 1), 5);
    for (std::size_t i = 0; i < 5; ++i) {
        target.points.push_back({dates[i], 0.01 * (i + 1), true});
        feature.points.push_back({dates[i], 1.0 + i, i != 2});
    }
    std::size_t dropped = 0;
    const auto s = build_supervised(target, feature, &dropped);
    CHECK(dropped == 1);
    CHECK(s.size() == 4);
    CHECK(s.dates[2] == dates[3]);
}

TEST_CASE("ols") {
    {
        const auto m = fit_ols(make_set({0, 1, 2, 3}, {-1, 2, 5, 8}));
        CHECK(m.slope == doctest::Approx(3.0));
        CHECK(m.intercept == doctest::Approx(-1.0));
    }
    {
        const auto m = fit_ols(make_set({0, 1}, {0, 2}));
        CHECK(m.slope == doctest::Approx(2.0));
        CHECK(m.intercept == doctest::Approx(0.0));
    }
    const auto data = noisy_set(400, 3);
    const auto m = fit_ols(data);
    double se = 0.0, sex = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double e = data.y[i] - m.predict(data.x[i]);
        se += e;
        sex += e * data.x[i];
        scale += std::fabs(data.y[i] * data.x[i]);
    }
    CHECK(std::fabs(se) <= 1e-8 * scale);
    CHECK(std::fabs(sex) <= 1e-8 * scale);
    CHECK_THROWS_AS(fit_ols(make_set({1, 1, 1}, {1, 2, 3})), ConstantFeature);
}

TEST_CASE("ols predictions are an affine image of the feature") {
    const auto split = chrono_split(noisy_set(600, 5), 0.8);
    const auto m = fit_ols(split.train);
    std::vector<double> pred;
    for (double x : split.test.x) pred.push_back(m.predict(x));
    const auto [plo, phi] = std::minmax_element(pred.begin(), pred.end());
    const auto [xlo, xhi] = std::minmax_element(split.test.x.begin(), split.test.x.end());
    CHECK(*phi - *plo == doctest::Approx(std::fabs(m.slope) * (*xhi - *xlo)).epsilon(1e-12));
}

TEST_CASE("svr on a constant target") {
    const auto data = make_set(testing::white_noise(60, 4), std::vector<double>(60, 0.7));
    const auto model = fit_svr(data, {});
    for (double q : {-2.0, -0.5, 0.0, 1.0, 3.0}) CHECK(std::fabs(model.predict(q) - 0.7) <= 1e-9);
}

TEST_CASE("svr follows a line with a large penalty") {
    std::vector<double> x, y;
    for (int i = 0; i < 50; ++i) {
        x.push_back(i / 49.0);
        y.push_back(2.0 * x.back());
    }
    SvrParams p;
    p.c = 1e4;
    p.epsilon = 0.01;
    const auto model = fit_svr(make_set(x, y), p);
    for (double q = 0.01; q < 1.0; q += 0.037) CHECK(std::fabs(model.predict(q) - 2.0 * q) <= 0.02);
    const auto audit = audit_kkt(model.solution(), model.scaled_x(),
                                 [&] {
                                     std::vector<double> ys;
                                     for (double v : y) ys.push_back(model.y_scaler().transform(v));
                                     return ys;
                                 }(),
                                 p);
    CHECK(audit.ok);
}

TEST_CASE("svr dual matches the enumerated QP oracle") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    for (int inst = 0; inst < 6; ++inst) {
        std::vector<double> x(6), y(6);
        for (int i = 0; i < 6; ++i) {
            x[i] = g(rng);
            y[i] = std::sin(x[i]) + 0.3 * g(rng);
        }
        SvrParams p;
        p.c = inst % 2 ? 0.5 : 3.0;
        p.epsilon = 0.1;
        p.gamma = 0.7;
        p.tolerance = 1e-9;
        const auto sol = solve_svr_dual(x, y, p);
        const auto oracle = testing::svr_qp_enumerate(x, y, p.c, p.epsilon, p.gamma);
        REQUIRE(oracle.found);
        for (double q = -3.0; q <= 3.0; q += 0.25) {
            CHECK(std::fabs(svr_decision(sol, x, p.gamma, q) - testing::svr_qp_predict(oracle, x, p.gamma, q)) <= 1e-3);
        }
        for (int i = 0; i < 6; ++i) CHECK(std::fabs(sol.coef(i) - oracle.beta[i]) <= 1e-3);
        CHECK(audit_kkt(sol, x, y, p).ok);
    }
}

TEST_CASE("svr KKT audit and interior multipliers") {
    const auto data = noisy_set(500, 6);
    SvrParams p;
    const auto model = fit_svr(data, p);
    const auto& sol = model.solution();
    std::vector<double> ys;
    for (double v : data.y) ys.push_back(model.y_scaler().transform(v));
    const auto audit = audit_kkt(sol, model.scaled_x(), ys, p);
    CHECK(audit.ok);
    CHECK(audit.max_complementarity == 0.0);
    CHECK(audit.equality_residual <= 1e-9);
    CHECK(audit.max_interior_tube_gap <= 1e-3);
    for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
        CHECK(sol.alpha[i] >= 0.0);
        CHECK(sol.alpha[i] <= p.c);
        CHECK(sol.alpha_star[i] >= 0.0);
        CHECK(sol.alpha_star[i] <= p.c);
    }
    CHECK(model.support_vectors() > 0);

    SvrParams bad;
    bad.c = 0.0;
    CHECK_THROWS_AS(fit_svr(data, bad), InvalidHyperparameter);
    bad = {};
    bad.gamma = -1.0;
    CHECK_THROWS_AS(fit_svr(data, bad), InvalidHyperparameter);
    bad = {};
    bad.max_iterations = 3;
    CHECK_THROWS_AS(fit_svr(data, bad), NonConvergence);
}

TEST_CASE("knn") {
    const auto train = make_set({0, 1, 2, 3}, {0, 10, 20, 30});
    CHECK(fit_knn(train, 2).predict(0.9) == doctest::Approx(5.0));
    CHECK(fit_knn(train, 1).predict(2.0) == 20.0);
    CHECK(fit_knn(train, 4).predict(-7.0) == doctest::Approx(15.0));
    // Equidistant neighbours: the earlier training index wins.
    CHECK(fit_knn(train, 1).predict(1.5) == 10.0);
    CHECK_THROWS_AS(fit_knn(train, 0), InvalidK);
    CHECK_THROWS_AS(fit_knn(train, 5), InvalidK);

    const auto data = noisy_set(300, 7);
    const auto knn = fit_knn(data, 5);
    const auto [lo, hi] = std::minmax_element(data.y.begin(), data.y.end());
    for (double q = 0.0; q < 4.0; q += 0.1) {
        const double v = knn.predict(q);
        CHECK(v >= *lo);
        CHECK(v <= *hi);
    }
}

TEST_CASE("metrics") {
    const std::vector<double> a{1, 2}, p{2, 4};
    const auto m = compute_metrics(a, p);
    CHECK(m.mae == 1.5);
    CHECK(m.mse == 2.5);
    CHECK(m.rmse == doctest::Approx(1.5811388300841898));
    CHECK(m.mape_percent == 100.0);  // |1-2|/1 and |2-4|/2 are both 1
    const auto z = compute_metrics(a, a);
    CHECK(z.mae == 0.0);
    CHECK(z.mse == 0.0);
    CHECK(z.rmse == 0.0);
    CHECK(z.mape_percent == 0.0);
    CHECK_THROWS_AS(compute_metrics(a, std::vector<double>{1}), LengthMismatch);
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{0, 1}, a), ZeroActualForMape);

    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.001, 10.0);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> x(50), y(50);
        for (int i = 0; i < 50; ++i) x[i] = u(rng), y[i] = u(rng);
        const auto r = compute_metrics(x, y);
        CHECK(std::fabs(r.rmse * r.rmse - r.mse) <= 1e-12 * r.mse);
    }
}

TEST_CASE("run_comparison") {
    const auto data = noisy_set(1000, 8);
    const auto a = run_comparison(data, {});
    const auto b = run_comparison(data, {});
    CHECK(a.train_size == 800);
    CHECK(a.test_size == 200);
    REQUIRE(a.models.size() == 3);
    for (const auto& name : {"ols", "svr", "knn"}) {
        const auto& ma = a.model(name);
        const auto& mb = b.model(name);
        CHECK(ma.predicted == mb.predicted);
        CHECK(ma.metrics.mse == mb.metrics.mse);
        CHECK(std::fabs(ma.metrics.rmse * ma.metrics.rmse - ma.metrics.mse) <= 1e-12 * ma.metrics.mse);
    }
    // A nonlinear relation: the kernel and neighbour models beat the line.
    CHECK(a.model("svr").metrics.mse < a.model("ols").metrics.mse);
    CHECK(a.model("knn").metrics.mse < a.model("ols").metrics.mse);

    const auto flat = run_comparison(make_set(testing::white_noise(100, 1), std::vector<double>(100, 0.02)), {});
    for (const auto& m : flat.models) CHECK(m.metrics.mae <= 1e-9);
}
