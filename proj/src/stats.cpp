#include "entrovol/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "entrovol/error.hpp"

namespace entrovol::stats {

namespace {

// Dickey-Fuller quantiles for the regression with constant and linear trend
// (Banerjee, Dolado, Galbraith & Hendry 1993, Table 4.2), the same table used by
// R's tseries::adf.test. Rows: sample size; columns: cumulative probability.
constexpr std::array<double, 6> kTableN = {25, 50, 100, 250, 500, 100000};
constexpr std::array<double, 8> kTableP = {0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99};
constexpr double kTable[6][8] = {
    {-4.38, -3.95, -3.60, -3.24, -1.14, -0.80, -0.50, -0.15},
    {-4.15, -3.80, -3.50, -3.18, -1.19, -0.87, -0.58, -0.24},
    {-4.04, -3.73, -3.45, -3.15, -1.22, -0.90, -0.62, -0.28},
    {-3.99, -3.69, -3.43, -3.13, -1.23, -0.92, -0.64, -0.31},
    {-3.98, -3.68, -3.42, -3.13, -1.24, -0.93, -0.65, -0.32},
    {-3.96, -3.66, -3.41, -3.12, -1.25, -0.94, -0.66, -0.33},
};

// Linear interpolation with constant extrapolation (R's approx(rule = 2)).
template <std::size_t N>
double interp(const std::array<double, N>& xs, const std::array<double, N>& ys, double x, bool* clamped = nullptr) {
    if (clamped) *clamped = x < xs.front() || x > xs.back();
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const auto hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + t * (ys[hi] - ys[lo]);
}

std::array<double, 8> quantiles_at(double n) {
    std::array<double, 8> out{};
    for (std::size_t c = 0; c < kTableP.size(); ++c) {
        std::array<double, 6> column{};
        for (std::size_t r = 0; r < kTableN.size(); ++r) column[r] = kTable[r][c];
        out[c] = interp(kTableN, column, n);
    }
    return out;
}

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw LengthMismatch("pearson: lengths differ");
    if (x.size() < 3) throw TooShort("pearson needs at least 3 points");
    const double mx = mean_of(x), my = mean_of(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw ConstantInput("pearson: constant input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

AcfResult acf(std::span<const double> x, std::size_t max_lag) {
    const std::size_t n = x.size();
    if (max_lag >= n) {
        throw LagTooLarge("max lag " + std::to_string(max_lag) + " must be below length " + std::to_string(n));
    }
    const double m = mean_of(x);
    double denom = 0.0;
    for (double v : x) denom += (v - m) * (v - m);
    if (denom == 0.0) throw ConstantInput("acf of a constant series");
    AcfResult out;
    out.values.resize(max_lag);
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t t = k; t < n; ++t) s += (x[t] - m) * (x[t - k] - m);
        out.values[k - 1] = s / denom;
    }
    return out;
}

double chi_square_sf(double q, double df) {
    if (!(df > 0.0)) throw InvalidDf("chi-square df must be positive");
    if (q <= 0.0) return 1.0;
    return boost::math::gamma_q(df / 2.0, q / 2.0);
}

TestResult ljung_box(std::span<const double> x, std::size_t lags, std::size_t fit_df) {
    if (lags <= fit_df) {
        throw InvalidDf("lags (" + std::to_string(lags) + ") must exceed fitted df (" + std::to_string(fit_df) + ")");
    }
    const auto r = acf(x, lags);
    const auto n = static_cast<double>(x.size());
    double q = 0.0;
    for (std::size_t k = 1; k <= lags; ++k) q += r.at(k) * r.at(k) / (n - static_cast<double>(k));
    q *= n * (n + 2.0);

    TestResult res;
    res.name = "ljung_box";
    res.statistic = q;
    res.df_or_lags = static_cast<int>(lags - fit_df);
    res.p_value = chi_square_sf(q, static_cast<double>(lags - fit_df));
    res.detail["lags"] = static_cast<double>(lags);
    res.detail["fit_df"] = static_cast<double>(fit_df);
    res.detail["n"] = n;
    return res;
}

double adf_statistic(std::span<const double> x, std::size_t lags) {
    const std::size_t n = x.size();
    if (n < lags + 4) throw TooShort("series too short for ADF");
    // Regress dx_t on [1, x_{t-1}, t, dx_{t-1}, ..., dx_{t-lags}] for t with full lag history.
    std::vector<double> dx(n - 1);
    for (std::size_t t = 1; t < n; ++t) dx[t - 1] = x[t] - x[t - 1];
    const std::size_t rows = dx.size() - lags;
    const std::size_t cols = 3 + lags;
    if (rows <= cols) throw TooShort("series too short for ADF with " + std::to_string(lags) + " lags");

    Eigen::MatrixXd design(rows, cols);
    Eigen::VectorXd target(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = r + lags;  // index into dx
        target(r) = dx[t];
        design(r, 0) = 1.0;
        design(r, 1) = x[t];  // level preceding dx[t]
        design(r, 2) = static_cast<double>(t + 1);
        for (std::size_t i = 1; i <= lags; ++i) design(r, 2 + i) = dx[t - i];
    }
    // Column equilibration; the t-ratio is invariant to column scaling.
    Eigen::VectorXd scale = design.colwise().norm().transpose();
    for (Eigen::Index c = 0; c < scale.size(); ++c) {
        if (scale(c) == 0.0) throw SingularRegression("ADF design has a zero column");
        design.col(c) /= scale(c);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < static_cast<Eigen::Index>(cols)) throw SingularRegression("ADF design is rank deficient");
    const Eigen::VectorXd coef = qr.solve(target);
    const Eigen::VectorXd resid = target - design * coef;
    const double sigma2 = resid.squaredNorm() / static_cast<double>(rows - cols);

    // (X'X)^{-1} = P R^{-1} R^{-T} P'; only the x_{t-1} diagonal entry is needed.
    const auto k = static_cast<Eigen::Index>(cols);
    Eigen::MatrixXd r_upper = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
    Eigen::MatrixXd r_inv =
        r_upper.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd cov_perm = r_inv * r_inv.transpose();
    const Eigen::MatrixXd cov = qr.colsPermutation() * cov_perm * qr.colsPermutation().transpose();
    const double se = std::sqrt(sigma2 * cov(1, 1));
    if (!(se > 0.0) || !std::isfinite(se)) throw SingularRegression("ADF standard error is degenerate");
    return coef(1) / se;
}

double dickey_fuller_quantile(double prob, double n) {
    const auto q = quantiles_at(n);
    for (std::size_t c = 0; c < kTableP.size(); ++c) {
        if (std::fabs(kTableP[c] - prob) < 1e-12) return q[c];
    }
    throw InvalidConfig("probability " + std::to_string(prob) + " is not tabulated");
}

double dickey_fuller_p_value(double statistic, double n, bool& clamped) {
    return interp(quantiles_at(n), kTableP, statistic, &clamped);
}

TestResult adf_test(std::span<const double> x) {
    if (x.size() < 30) throw TooShort("ADF needs at least 30 points, got " + std::to_string(x.size()));
    const auto lags = static_cast<std::size_t>(std::trunc(std::cbrt(static_cast<double>(x.size() - 1))));
    TestResult res;
    res.name = "adf";
    res.statistic = adf_statistic(x, lags);
    res.df_or_lags = static_cast<int>(lags);
    const double n_table = static_cast<double>(x.size() - 1);
    res.p_value = dickey_fuller_p_value(res.statistic, n_table, res.clamped);
    res.detail["lags"] = static_cast<double>(lags);
    res.detail["n"] = static_cast<double>(x.size());
    res.detail["critical_1pct"] = dickey_fuller_quantile(0.01, n_table);
    res.detail["critical_5pct"] = dickey_fuller_quantile(0.05, n_table);
    res.detail["critical_10pct"] = dickey_fuller_quantile(0.10, n_table);
    return res;
}

}  // namespace entrovol::stats
