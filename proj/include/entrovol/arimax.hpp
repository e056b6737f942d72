#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entrovol/ingest.hpp"
#include "entrovol/stats.hpp"

namespace entrovol::arimax {

/// Orders of the error process. The regression Y_t = beta * X_t + eta_t has
/// eta differenced d times following ARMA(p, q); d = 0 adds an intercept.
struct ArimaxSpec {
    std::size_t p = 4;
    std::size_t d = 1;
    std::size_t q = 3;
    bool include_regressor = true;

    void validate() const;
    std::string label() const;  // "ARIMA(4,1,3)"
};

struct FitOptions {
    std::size_t max_evaluations = 40000;  // per start
    std::uint64_t seed = 20230410;       // jittered starts
    bool parallel_starts = true;
};

struct ArimaxFit {
    ArimaxSpec spec;
    double beta = 0.0;
    double intercept = 0.0;  // only estimated when d == 0
    std::vector<double> phi;
    std::vector<double> theta;  // MA: w_t = ... + e_t + sum theta_j e_{t-j}
    double sigma2 = 0.0;
    double css = 0.0;
    std::size_t n_effective = 0;
    double loglik = 0.0;
    double aic = 0.0;
    double aicc = 0.0;
    double bic = 0.0;
    std::vector<std::string> coef_names;  // ar1.., ma1.., intercept, xreg
    std::vector<double> coef;
    std::vector<double> se;  // NaN where the curvature was not positive definite
    DatedSeries residuals;   // one per differenced observation
    std::size_t evaluations = 0;
    std::size_t best_start = 0;

    // Retained for forecasting.
    std::vector<double> y;
    std::vector<double> x;
    std::vector<Date> dates;
};

/// The differenced data the CSS objective consumes.
struct PreparedData {
    ArimaxSpec spec;
    std::vector<double> dy;  // d-times differenced response
    std::vector<double> dx;  // d-times differenced regressor
};

PreparedData prepare(std::span<const double> y, std::span<const double> x, const ArimaxSpec& spec);

/// Packed layout: phi_1..phi_p, theta_1..theta_q, [beta], [intercept when d == 0].
std::size_t packed_size(const ArimaxSpec& spec);

/// Innovations e_t = w_t - sum phi_i w_{t-i} - sum theta_j e_{t-j}, zero pre-sample.
std::vector<double> innovations(std::span<const double> params, const PreparedData& data);

/// Sum of squared innovations (no penalty).
double css(std::span<const double> params, const PreparedData& data);

/// css plus a smooth penalty that is zero while every AR and MA root lies
/// outside the unit circle with margin.
double css_objective(std::span<const double> params, const PreparedData& data);

/// Largest modulus of the reciprocal roots of 1 - sum c_i z^i (sign = -1) or
/// 1 + sum c_i z^i (sign = +1). Below 1 means every root is outside the unit circle.
double max_inverse_root(std::span<const double> coeffs, double sign);

/// CSS fit, Nelder-Mead over (phi, theta) from five starts with beta profiled
/// out by least squares. Throws NonConvergence, SingularFit.
ArimaxFit fit_regression_arima_errors(std::span<const DatedValue> y, std::span<const DatedValue> x,
                                      const ArimaxSpec& spec, const FitOptions& options = {});

struct OrderCandidate {
    ArimaxSpec spec;
    double aicc = 0.0;
    bool ok = false;
};

struct OrderSelection {
    ArimaxFit best;
    std::vector<OrderCandidate> candidates;
};

/// Grid search over p, q <= max_pq and d <= max_d minimising AICc.
OrderSelection select_order(std::span<const DatedValue> y, std::span<const DatedValue> x, std::size_t max_pq = 5,
                            std::size_t max_d = 1, const FitOptions& options = {});

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
};

struct ResidualDiagnostics {
    bool degenerate = false;
    std::string message;
    stats::TestResult ljung_box;
    stats::AcfResult acf;
    std::vector<HistogramBin> histogram;
};

/// Freedman-Diaconis bins (Sturges when the IQR is zero).
std::vector<HistogramBin> histogram_fd(std::span<const double> values);

/// Ljung-Box with fit_df = p + q, ACF to max(lags, 30), histogram. Degenerate
/// residuals are reported, not thrown. Throws InvalidDf when lags <= p + q.
ResidualDiagnostics residual_diagnostics(const ArimaxFit& fit, std::size_t lags = 10);

struct ForecastStep {
    std::size_t step = 0;
    double x = 0.0;
    double point = 0.0;
    double lo80 = 0.0, hi80 = 0.0, lo95 = 0.0, hi95 = 0.0;
    double se = 0.0;
};

struct ForecastResult {
    std::vector<ForecastStep> steps;
    bool held_at_mean = false;
};

/// Psi weights psi_0..psi_{h-1} of the integrated error process.
std::vector<double> psi_weights(const ArimaxFit& fit, std::size_t horizon);

/// Point = beta x + intercept + integrated ARMA forecast of eta. Bands use
/// z * sqrt(sigma2 * cumulative psi^2); the regressor is treated as known.
/// Without `future_x` the regressor is held at its historical mean.
/// Throws HorizonZero, LengthMismatch.
ForecastResult forecast(const ArimaxFit& fit, std::size_t horizon,
                        std::optional<std::span<const double>> future_x = std::nullopt);

}  // namespace entrovol::arimax
