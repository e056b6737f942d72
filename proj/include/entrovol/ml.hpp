#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entrovol/date.hpp"
#include "entrovol/series.hpp"

namespace entrovol::ml {

/// Feature x (SampEn) and target y (rolling std) with aligned dates.
struct SupervisedSet {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<Date> dates;

    std::size_t size() const { return x.size(); }
    /// Throws LengthMismatch / NonMonotonicDates / InvalidConfig on a broken set.
    void validate() const;
};

/// Joins target and feature on right-edge date; windows undefined in either are skipped
/// and counted in `dropped`.
SupervisedSet build_supervised(const series::RollingSeries& target, const series::RollingSeries& feature,
                               std::size_t* dropped = nullptr);

struct ChronoSplit {
    SupervisedSet train;
    SupervisedSet test;
    double ratio = 0.8;
};

/// First floor(ratio * n) points train, the rest test. Throws TooShort, InvalidConfig.
ChronoSplit chrono_split(const SupervisedSet& data, double ratio);

/// Standardisation fitted on training data. A zero spread is replaced by 1.
struct Scaler {
    double mean = 0.0;
    double std = 1.0;

    static Scaler fit(std::span<const double> v);
    double transform(double v) const { return (v - mean) / std; }
    double inverse(double z) const { return z * std + mean; }
};

struct LinearModel {
    double slope = 0.0;
    double intercept = 0.0;

    double predict(double x) const { return slope * x + intercept; }
};

/// Least squares line. Throws ConstantFeature.
LinearModel fit_ols(const SupervisedSet& train);

struct SvrParams {
    double c = 1.0;
    double epsilon = 0.1;
    double gamma = 1.0;
    double tolerance = 1e-3;           // max KKT violation at termination
    std::size_t max_iterations = 10'000'000;
    std::size_t cache_mb = 256;
};

/// Dual solution of the epsilon-SVR in the (already scaled) coordinates it was solved in.
struct SvrSolution {
    std::vector<double> alpha;       // weight on the upper tube side
    std::vector<double> alpha_star;  // weight on the lower tube side
    double bias = 0.0;
    std::size_t iterations = 0;
    double max_violation = 0.0;

    double coef(std::size_t i) const { return alpha[i] - alpha_star[i]; }
};

/// SMO (second-order working set selection) on the epsilon-insensitive dual with
/// RBF kernel exp(-gamma (u - v)^2). Throws NonConvergence, InvalidHyperparameter.
SvrSolution solve_svr_dual(std::span<const double> x, std::span<const double> y, const SvrParams& params);

/// sum_i (alpha_i - alpha*_i) k(x_i, query) + bias, in solver coordinates.
double svr_decision(const SvrSolution& sol, std::span<const double> x, double gamma, double query);

struct KktAudit {
    bool ok = true;
    double max_box_violation = 0.0;
    double max_complementarity = 0.0;  // max alpha_i * alpha*_i
    double equality_residual = 0.0;    // |sum (alpha_i - alpha*_i)|
    double max_interior_tube_gap = 0.0; // | |y_i - f(x_i)| - epsilon | over interior multipliers
};

KktAudit audit_kkt(const SvrSolution& sol, std::span<const double> x, std::span<const double> y,
                   const SvrParams& params);

class SvrModel {
public:
    SvrModel(Scaler x_scaler, Scaler y_scaler, std::vector<double> scaled_x, SvrSolution solution, SvrParams params);

    double predict(double x) const;
    const SvrSolution& solution() const { return solution_; }
    const Scaler& x_scaler() const { return x_scaler_; }
    const Scaler& y_scaler() const { return y_scaler_; }
    const std::vector<double>& scaled_x() const { return scaled_x_; }
    const SvrParams& params() const { return params_; }
    std::size_t support_vectors() const;

private:
    Scaler x_scaler_;
    Scaler y_scaler_;
    std::vector<double> scaled_x_;
    SvrSolution solution_;
    SvrParams params_;
};

/// Standardises x and y on the training set, solves, and audits the KKT conditions
/// (throws NonConvergence if the audit fails).
SvrModel fit_svr(const SupervisedSet& train, const SvrParams& params);

class KnnModel {
public:
    KnnModel(Scaler scaler, std::vector<double> scaled_x, std::vector<double> y, std::size_t k);

    /// Mean target of the k nearest training points; distance ties go to the earlier index.
    double predict(double x) const;
    std::size_t k() const { return k_; }

private:
    Scaler scaler_;
    std::vector<double> scaled_x_;
    std::vector<double> y_;
    std::size_t k_;
};

/// Throws InvalidK unless 1 <= k <= train size.
KnnModel fit_knn(const SupervisedSet& train, std::size_t k);

struct Metrics {
    double mae = 0.0;
    double mape_percent = 0.0;
    double mse = 0.0;
    double rmse = 0.0;
};

/// Throws LengthMismatch, TooShort (empty), ZeroActualForMape.
Metrics compute_metrics(std::span<const double> actual, std::span<const double> predicted);

struct MlConfig {
    double ratio = 0.8;
    SvrParams svr{};
    std::size_t knn_k = 5;
};

struct ModelTrace {
    std::string model;
    Metrics metrics;
    std::vector<double> predicted;
};

struct MetricsReport {
    MlConfig config;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::vector<Date> test_dates;
    std::vector<double> test_actual;
    std::vector<ModelTrace> models;  // "ols", "svr", "knn"
    LinearModel ols;
    std::size_t svr_support_vectors = 0;
    std::size_t svr_iterations = 0;

    const ModelTrace& model(const std::string& name) const;
};

/// Split, fit all three models on train, predict test, score.
MetricsReport run_comparison(const SupervisedSet& data, const MlConfig& config);

}  // namespace entrovol::ml
