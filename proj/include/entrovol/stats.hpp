#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace entrovol::stats {

struct TestResult {
    std::string name;
    double statistic = 0.0;
    double p_value = 1.0;
    bool clamped = false;  // p-value sits at a table boundary
    int df_or_lags = 0;
    std::map<std::string, double> detail;
};

/// Autocorrelations at lags 1..max_lag (values[k-1] is lag k).
struct AcfResult {
    std::vector<double> values;

    std::size_t max_lag() const { return values.size(); }
    double at(std::size_t lag) const { return values.at(lag - 1); }
};

/// Product-moment correlation. Throws LengthMismatch, TooShort (< 3), ConstantInput.
double pearson(std::span<const double> x, std::span<const double> y);

/// Biased-denominator sample ACF. Throws ConstantInput, LagTooLarge.
AcfResult acf(std::span<const double> x, std::size_t max_lag);

/// Q = n(n+2) sum rho_k^2 / (n-k); p from chi-square with lags - fit_df degrees of freedom.
TestResult ljung_box(std::span<const double> x, std::size_t lags, std::size_t fit_df);

/// Upper tail of chi-square(df) at q.
double chi_square_sf(double q, double df);

/// ADF with constant and linear trend, floor((n-1)^(1/3)) lagged differences.
/// The p-value is interpolated in the Dickey-Fuller constant+trend table and
/// clamped to [0.01, 0.99]. Throws TooShort (n < 30), SingularRegression.
TestResult adf_test(std::span<const double> x);

/// The bare ADF t-ratio for an explicit lag order (no p-value lookup).
double adf_statistic(std::span<const double> x, std::size_t lags);

/// Table quantile for cumulative probability `prob` (one of the tabulated
/// levels 0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99) interpolated at sample size n.
double dickey_fuller_quantile(double prob, double n);

/// p-value lookup used by adf_test; `clamped` reports a table-boundary hit.
double dickey_fuller_p_value(double statistic, double n, bool& clamped);

}  // namespace entrovol::stats
