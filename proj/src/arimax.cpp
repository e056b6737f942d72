#include "entrovol/arimax.hpp"

#include <boost/math/distributions/normal.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "entrovol/error.hpp"
#include "entrovol/optim.hpp"

namespace entrovol::arimax {

namespace {

constexpr double kRootBound = 0.9999;  // max modulus of reciprocal roots before the penalty engages
constexpr double kPenaltyWeight = 1e6;

std::vector<double> difference(std::span<const double> v, std::size_t d) {
    std::vector<double> out(v.begin(), v.end());
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t t = out.size() - 1; t > 0; --t) out[t] -= out[t - 1];
        out.erase(out.begin());
    }
    return out;
}

// e_t = u_t - sum phi_i u_{t-i} - sum theta_j e_{t-j} with zero pre-sample values.
void arma_filter(std::span<const double> phi, std::span<const double> theta, std::span<const double> u,
                 std::vector<double>& e) {
    const std::size_t n = u.size();
    e.assign(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double v = u[t];
        for (std::size_t i = 0; i < phi.size() && i < t; ++i) v -= phi[i] * u[t - 1 - i];
        for (std::size_t j = 0; j < theta.size() && j < t; ++j) v -= theta[j] * e[t - 1 - j];
        e[t] = v;
    }
}

double penalty(std::span<const double> phi, std::span<const double> theta, double scale) {
    double excess = 0.0;
    if (!phi.empty()) excess += std::max(0.0, max_inverse_root(phi, -1.0) - kRootBound);
    if (!theta.empty()) excess += std::max(0.0, max_inverse_root(theta, +1.0) - kRootBound);
    return excess > 0.0 ? scale * kPenaltyWeight * excess * excess : 0.0;
}

struct Profile {
    double beta = 0.0;
    double intercept = 0.0;
    double css = 0.0;
};

// For fixed (phi, theta) the innovations are linear in (beta, intercept), so
// those are solved exactly by least squares on the filtered series.
class Profiler {
public:
    explicit Profiler(const PreparedData& data) : data_(data) {
        if (data.spec.d == 0) ones_.assign(data.dy.size(), 1.0);
    }

    Profile run(std::span<const double> arma) const {
        const std::size_t p = data_.spec.p;
        const auto phi = arma.subspan(0, p);
        const auto theta = arma.subspan(p, data_.spec.q);
        arma_filter(phi, theta, data_.dy, fy_);
        const bool with_beta = data_.spec.include_regressor;
        const bool with_mu = data_.spec.d == 0;
        if (with_beta) arma_filter(phi, theta, data_.dx, fx_);
        if (with_mu) arma_filter(phi, theta, ones_, f1_);

        Profile out;
        const std::size_t n = fy_.size();
        if (with_beta && with_mu) {
            double sxx = 0, sx1 = 0, s11 = 0, sxy = 0, s1y = 0;
            for (std::size_t t = 0; t < n; ++t) {
                sxx += fx_[t] * fx_[t];
                sx1 += fx_[t] * f1_[t];
                s11 += f1_[t] * f1_[t];
                sxy += fx_[t] * fy_[t];
                s1y += f1_[t] * fy_[t];
            }
            const double det = sxx * s11 - sx1 * sx1;
            if (det > 0.0) {
                out.beta = (s11 * sxy - sx1 * s1y) / det;
                out.intercept = (sxx * s1y - sx1 * sxy) / det;
            }
        } else if (with_beta) {
            double sxx = 0, sxy = 0;
            for (std::size_t t = 0; t < n; ++t) {
                sxx += fx_[t] * fx_[t];
                sxy += fx_[t] * fy_[t];
            }
            if (sxx > 0.0) out.beta = sxy / sxx;
        } else if (with_mu) {
            double s11 = 0, s1y = 0;
            for (std::size_t t = 0; t < n; ++t) {
                s11 += f1_[t] * f1_[t];
                s1y += f1_[t] * fy_[t];
            }
            if (s11 > 0.0) out.intercept = s1y / s11;
        }
        double s = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            double e = fy_[t];
            if (with_beta) e -= out.beta * fx_[t];
            if (with_mu) e -= out.intercept * f1_[t];
            s += e * e;
        }
        out.css = s;
        return out;
    }

private:
    const PreparedData& data_;
    std::vector<double> ones_;
    mutable std::vector<double> fy_, fx_, f1_;
};

std::vector<double> pack(const ArimaxSpec& spec, std::span<const double> arma, double beta, double intercept) {
    std::vector<double> out(arma.begin(), arma.end());
    if (spec.include_regressor) out.push_back(beta);
    if (spec.d == 0) out.push_back(intercept);
    return out;
}

// Pulls coefficients toward zero until both polynomials are comfortably inside the region.
void shrink_to_valid(std::vector<double>& arma, std::size_t p) {
    for (int iter = 0; iter < 200; ++iter) {
        const std::span<const double> all(arma);
        const double ar = p > 0 ? max_inverse_root(all.subspan(0, p), -1.0) : 0.0;
        const double ma = arma.size() > p ? max_inverse_root(all.subspan(p), +1.0) : 0.0;
        if (ar < 0.98 && ma < 0.98) return;
        for (auto& c : arma) c *= 0.9;
    }
}

// Least squares via Eigen, returns empty on rank deficiency.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < a.cols()) return {};
    return qr.solve(b);
}

std::vector<double> hannan_rissanen(std::span<const double> w, std::size_t p, std::size_t q) {
    std::vector<double> out(p + q, 0.0);
    const std::size_t n = w.size();
    const std::size_t long_order = std::min<std::size_t>(std::max<std::size_t>(p + q + 5, 10), n / 10);
    if (long_order == 0 || n < 4 * (long_order + p + q + 1)) return out;

    std::vector<double> resid(n, 0.0);
    if (q > 0) {
        const std::size_t rows = n - long_order;
        Eigen::MatrixXd a(rows, long_order);
        Eigen::VectorXd b(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t t = r + long_order;
            b(r) = w[t];
            for (std::size_t i = 0; i < long_order; ++i) a(r, i) = w[t - 1 - i];
        }
        const auto coef = least_squares(a, b);
        if (coef.size() == 0) return out;
        const Eigen::VectorXd e = b - a * coef;
        for (std::size_t r = 0; r < rows; ++r) resid[r + long_order] = e(r);
    }
    const std::size_t start = long_order + std::max(p, q);
    if (n <= start + p + q + 1) return out;
    const std::size_t rows = n - start;
    Eigen::MatrixXd a(rows, p + q);
    Eigen::VectorXd b(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = r + start;
        b(r) = w[t];
        for (std::size_t i = 0; i < p; ++i) a(r, i) = w[t - 1 - i];
        for (std::size_t j = 0; j < q; ++j) a(r, p + j) = resid[t - 1 - j];
    }
    const auto coef = least_squares(a, b);
    if (coef.size() == 0) return out;
    for (std::size_t i = 0; i < p + q; ++i) out[i] = coef(static_cast<Eigen::Index>(i));
    return out;
}

double sd_of(std::span<const double> v) {
    if (v.size() < 2) return 1.0;
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    const double sd = std::sqrt(s / static_cast<double>(v.size() - 1));
    return sd > 0.0 ? sd : 1.0;
}

double quantile_sorted(const std::vector<double>& sorted, double prob) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> binomial_difference(std::size_t d) {
    // coefficients of (1 - B)^d
    std::vector<double> c{1.0};
    for (std::size_t k = 0; k < d; ++k) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] -= c[i];
        }
        c = std::move(next);
    }
    return c;
}

}  // namespace

void ArimaxSpec::validate() const {
    if (d > 2) throw InvalidConfig("differencing degree must be 0, 1 or 2");
    if (p + q == 0 && !include_regressor) throw InvalidConfig("model has no parameters");
}

std::string ArimaxSpec::label() const {
    return "ARIMA(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")";
}

std::size_t packed_size(const ArimaxSpec& spec) {
    return spec.p + spec.q + (spec.include_regressor ? 1 : 0) + (spec.d == 0 ? 1 : 0);
}

PreparedData prepare(std::span<const double> y, std::span<const double> x, const ArimaxSpec& spec) {
    spec.validate();
    if (y.size() != x.size()) throw LengthMismatch("response and regressor lengths differ");
    if (y.size() < spec.d + std::max(spec.p, spec.q) + packed_size(spec) + 10) {
        throw TooShort("series of " + std::to_string(y.size()) + " points is too short for " + spec.label());
    }
    PreparedData data;
    data.spec = spec;
    data.dy = difference(y, spec.d);
    data.dx = difference(x, spec.d);
    return data;
}

double max_inverse_root(std::span<const double> coeffs, double sign) {
    std::size_t order = coeffs.size();
    while (order > 0 && coeffs[order - 1] == 0.0) --order;
    if (order == 0) return 0.0;
    if (order == 1) return std::fabs(coeffs[0]);
    // Companion matrix of z^k - a_1 z^{k-1} - ... - a_k with a_i = -sign * c_i.
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(order), static_cast<Eigen::Index>(order));
    for (std::size_t i = 0; i < order; ++i) companion(0, static_cast<Eigen::Index>(i)) = -sign * coeffs[i];
    for (std::size_t i = 1; i < order; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<double> innovations(std::span<const double> params, const PreparedData& data) {
    const auto& spec = data.spec;
    if (params.size() != packed_size(spec)) throw InvalidConfig("parameter vector has the wrong size");
    const auto phi = params.subspan(0, spec.p);
    const auto theta = params.subspan(spec.p, spec.q);
    std::size_t at = spec.p + spec.q;
    const double beta = spec.include_regressor ? params[at++] : 0.0;
    const double mu = spec.d == 0 ? params[at] : 0.0;
    std::vector<double> w(data.dy.size());
    for (std::size_t t = 0; t < w.size(); ++t) w[t] = data.dy[t] - beta * data.dx[t] - mu;
    std::vector<double> e;
    arma_filter(phi, theta, w, e);
    return e;
}

double css(std::span<const double> params, const PreparedData& data) {
    const auto e = innovations(params, data);
    double s = 0.0;
    for (double v : e) s += v * v;
    return s;
}

double css_objective(std::span<const double> params, const PreparedData& data) {
    const auto& spec = data.spec;
    double scale = 0.0;
    for (double v : data.dy) scale += v * v;
    return css(params, data) +
           penalty(params.subspan(0, spec.p), params.subspan(spec.p, spec.q), scale > 0.0 ? scale : 1.0);
}

ArimaxFit fit_regression_arima_errors(std::span<const DatedValue> y, std::span<const DatedValue> x,
                                      const ArimaxSpec& spec, const FitOptions& options) {
    if (y.size() != x.size()) throw LengthMismatch("response and regressor lengths differ");
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i].date != x[i].date) throw LengthMismatch("response and regressor are not date-aligned at " + y[i].date.iso());
    }
    std::vector<double> yv(y.size()), xv(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        yv[i] = y[i].value;
        xv[i] = x[i].value;
    }
    const PreparedData data = prepare(yv, xv, spec);
    const std::size_t n_arma = spec.p + spec.q;

    double scale = 0.0;
    for (double v : data.dy) scale += v * v;
    if (!(scale > 0.0)) throw SingularFit("differenced response is identically zero");

    const Profiler profiler(data);

    // Starts: zeros, Hannan-Rissanen on the OLS-detrended error, three jittered copies.
    std::vector<std::vector<double>> starts;
    starts.emplace_back(n_arma, 0.0);
    if (n_arma > 0) {
        const Profile ols = profiler.run(std::vector<double>(n_arma, 0.0));
        std::vector<double> w0(data.dy.size());
        for (std::size_t t = 0; t < w0.size(); ++t) w0[t] = data.dy[t] - ols.beta * data.dx[t] - ols.intercept;
        auto hr = hannan_rissanen(w0, spec.p, spec.q);
        shrink_to_valid(hr, spec.p);
        starts.push_back(hr);
        for (std::uint64_t k = 0; k < 3; ++k) {
            std::mt19937_64 rng(options.seed + k);
            std::normal_distribution<double> jitter(0.0, 0.1);
            auto s = hr;
            for (auto& c : s) c += jitter(rng);
            shrink_to_valid(s, spec.p);
            starts.push_back(std::move(s));
        }
    }

    std::vector<optim::NelderMeadResult> results(starts.size());
    optim::NelderMeadOptions nm;
    nm.max_evaluations = options.max_evaluations;
    nm.restarts = 2;
    nm.f_tolerance = 1e-12;
    nm.x_tolerance = 1e-9;
    const auto count = static_cast<long>(starts.size());
    const bool parallel = options.parallel_starts && n_arma > 0;
    if (n_arma == 0) {
        results[0].x = {};
        results[0].value = profiler.run({}).css;
        results[0].evaluations = 1;
        results[0].converged = true;
    } else {
#pragma omp parallel for schedule(static, 1) if (parallel)
        for (long s = 0; s < count; ++s) {
            // Profiler buffers are not shareable across threads.
            const Profiler local(data);
            auto f = [&](std::span<const double> arma) {
                const Profile pr = local.run(arma);
                return pr.css + penalty(arma.subspan(0, spec.p), arma.subspan(spec.p, spec.q), scale);
            };
            results[static_cast<std::size_t>(s)] = optim::nelder_mead(f, starts[static_cast<std::size_t>(s)], nm);
        }
    }

    std::size_t best = 0;
    std::size_t total_evals = 0;
    for (std::size_t s = 0; s < results.size(); ++s) {
        total_evals += results[s].evaluations;
        if (results[s].value < results[best].value) best = s;
    }
    if (!results[best].converged) {
        throw NonConvergence(spec.label() + ": Nelder-Mead hit " + std::to_string(options.max_evaluations) +
                             " evaluations without meeting tolerance");
    }

    const auto& arma = results[best].x;
    const Profile pr = profiler.run(arma);
    ArimaxFit fit;
    fit.spec = spec;
    fit.phi.assign(arma.begin(), arma.begin() + static_cast<std::ptrdiff_t>(spec.p));
    fit.theta.assign(arma.begin() + static_cast<std::ptrdiff_t>(spec.p), arma.end());
    fit.beta = spec.include_regressor ? pr.beta : 0.0;
    fit.intercept = spec.d == 0 ? pr.intercept : 0.0;
    fit.evaluations = total_evals;
    fit.best_start = best;

    const auto params = pack(spec, arma, fit.beta, fit.intercept);
    const auto e = innovations(params, data);
    fit.css = 0.0;
    for (double v : e) fit.css += v * v;
    fit.n_effective = e.size();
    const auto n = static_cast<double>(fit.n_effective);
    fit.sigma2 = fit.css / n;
    if (!(fit.sigma2 > 0.0)) throw SingularFit("zero innovation variance");
    const double k = static_cast<double>(params.size() + 1);
    fit.loglik = -0.5 * n * (std::log(2.0 * M_PI * fit.sigma2) + 1.0);
    fit.aic = -2.0 * fit.loglik + 2.0 * k;
    fit.aicc = n - k - 1.0 > 0.0 ? fit.aic + 2.0 * k * (k + 1.0) / (n - k - 1.0) : std::numeric_limits<double>::infinity();
    fit.bic = -2.0 * fit.loglik + k * std::log(n);

    for (std::size_t i = 0; i < spec.p; ++i) fit.coef_names.push_back("ar" + std::to_string(i + 1));
    for (std::size_t j = 0; j < spec.q; ++j) fit.coef_names.push_back("ma" + std::to_string(j + 1));
    if (spec.d == 0) fit.coef_names.push_back("intercept");
    if (spec.include_regressor) fit.coef_names.push_back("xreg");
    // `coef` follows coef_names (intercept before xreg); `params` is the packed order.
    fit.coef.assign(arma.begin(), arma.end());
    if (spec.d == 0) fit.coef.push_back(fit.intercept);
    if (spec.include_regressor) fit.coef.push_back(fit.beta);

    // Standard errors: cov = 2 sigma2 H^{-1}, H the finite-difference Hessian of the CSS.
    const std::size_t dim = params.size();
    std::vector<double> steps(dim, 1e-4);
    {
        std::size_t at = n_arma;
        const double sdy = sd_of(data.dy);
        if (spec.include_regressor) steps[at++] = 1e-4 * sdy / sd_of(data.dx);
        if (spec.d == 0) steps[at] = 1e-4 * sdy;
        for (std::size_t i = 0; i < dim; ++i) steps[i] = std::max(steps[i], 1e-4 * std::fabs(params[i]));
    }
    Eigen::MatrixXd hess(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    auto shifted = [&](std::size_t i, double di, std::size_t j, double dj) {
        auto v = params;
        v[i] += di;
        v[j] += dj;
        return css(v, data);
    };
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i; j < dim; ++j) {
            const double hi = steps[i], hj = steps[j];
            double h;
            if (i == j) {
                h = (shifted(i, hi, i, 0.0) - 2.0 * fit.css + shifted(i, -hi, i, 0.0)) / (hi * hi);
            } else {
                h = (shifted(i, hi, j, hj) - shifted(i, hi, j, -hj) - shifted(i, -hi, j, hj) +
                     shifted(i, -hi, j, -hj)) /
                    (4.0 * hi * hj);
            }
            hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h;
            hess(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = h;
        }
    }
    std::vector<double> se_packed(dim, std::numeric_limits<double>::quiet_NaN());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        const Eigen::MatrixXd cov = 2.0 * fit.sigma2 * ldlt.solve(Eigen::MatrixXd::Identity(hess.rows(), hess.cols()));
        for (std::size_t i = 0; i < dim; ++i) {
            const double v = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
            if (v > 0.0) se_packed[i] = std::sqrt(v);
        }
    }
    fit.se.assign(se_packed.begin(), se_packed.begin() + static_cast<std::ptrdiff_t>(n_arma));
    {
        std::size_t at = n_arma;
        const double se_beta = spec.include_regressor ? se_packed[at++] : 0.0;
        const double se_mu = spec.d == 0 ? se_packed[at] : 0.0;
        if (spec.d == 0) fit.se.push_back(se_mu);
        if (spec.include_regressor) fit.se.push_back(se_beta);
    }

    fit.residuals.reserve(e.size());
    for (std::size_t t = 0; t < e.size(); ++t) fit.residuals.push_back({y[t + spec.d].date, e[t]});
    fit.y = std::move(yv);
    fit.x = std::move(xv);
    fit.dates.reserve(y.size());
    for (const auto& p : y) fit.dates.push_back(p.date);
    return fit;
}

OrderSelection select_order(std::span<const DatedValue> y, std::span<const DatedValue> x, std::size_t max_pq,
                            std::size_t max_d, const FitOptions& options) {
    OrderSelection out;
    bool have = false;
    for (std::size_t d = 0; d <= max_d; ++d) {
        for (std::size_t p = 0; p <= max_pq; ++p) {
            for (std::size_t q = 0; q <= max_pq; ++q) {
                ArimaxSpec spec{p, d, q, true};
                OrderCandidate cand{spec, std::numeric_limits<double>::infinity(), false};
                try {
                    auto fit = fit_regression_arima_errors(y, x, spec, options);
                    cand.aicc = fit.aicc;
                    cand.ok = true;
                    if (!have || fit.aicc < out.best.aicc) {
                        out.best = std::move(fit);
                        have = true;
                    }
                } catch (const Error&) {
                }
                out.candidates.push_back(cand);
            }
        }
    }
    if (!have) throw NonConvergence("no candidate order could be fitted");
    return out;
}

std::vector<HistogramBin> histogram_fd(std::span<const double> values) {
    std::vector<HistogramBin> bins;
    if (values.empty()) return bins;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front(), hi = sorted.back();
    if (!(hi > lo)) {
        bins.push_back({lo, hi, sorted.size()});
        return bins;
    }
    const auto n = static_cast<double>(sorted.size());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    std::size_t count;
    if (iqr > 0.0) {
        const double width = 2.0 * iqr / std::cbrt(n);
        count = static_cast<std::size_t>(std::ceil((hi - lo) / width));
    } else {
        count = static_cast<std::size_t>(std::ceil(std::log2(n) + 1.0));
    }
    count = std::clamp<std::size_t>(count, 1, 1000);
    const double width = (hi - lo) / static_cast<double>(count);
    bins.resize(count);
    for (std::size_t b = 0; b < count; ++b) {
        bins[b].lo = lo + width * static_cast<double>(b);
        bins[b].hi = b + 1 == count ? hi : lo + width * static_cast<double>(b + 1);
    }
    for (double v : sorted) {
        auto b = static_cast<std::size_t>((v - lo) / width);
        if (b >= count) b = count - 1;
        ++bins[b].count;
    }
    return bins;
}

ResidualDiagnostics residual_diagnostics(const ArimaxFit& fit, std::size_t lags) {
    const std::size_t model_df = fit.spec.p + fit.spec.q;
    if (lags <= model_df) {
        throw InvalidDf("lags (" + std::to_string(lags) + ") must exceed model df (" + std::to_string(model_df) + ")");
    }
    ResidualDiagnostics out;
    std::vector<double> r(fit.residuals.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = fit.residuals[i].value;
    out.histogram = histogram_fd(r);
    try {
        out.ljung_box = stats::ljung_box(r, lags, model_df);
        out.acf = stats::acf(r, std::min(std::max<std::size_t>(lags, 30), r.size() - 1));
    } catch (const Error& err) {
        out.degenerate = true;
        out.message = err.what();
    }
    return out;
}

std::vector<double> psi_weights(const ArimaxFit& fit, std::size_t horizon) {
    // phi*(B) = phi(B) (1 - B)^d written as 1 - sum a_i B^i
    const auto diff = binomial_difference(fit.spec.d);
    std::vector<double> ar_poly(fit.phi.size() + 1, 0.0);
    ar_poly[0] = 1.0;
    for (std::size_t i = 0; i < fit.phi.size(); ++i) ar_poly[i + 1] = -fit.phi[i];
    std::vector<double> full(ar_poly.size() + diff.size() - 1, 0.0);
    for (std::size_t i = 0; i < ar_poly.size(); ++i) {
        for (std::size_t j = 0; j < diff.size(); ++j) full[i + j] += ar_poly[i] * diff[j];
    }
    std::vector<double> psi(horizon, 0.0);
    if (horizon == 0) return psi;
    psi[0] = 1.0;
    for (std::size_t j = 1; j < horizon; ++j) {
        double v = j <= fit.theta.size() ? fit.theta[j - 1] : 0.0;
        for (std::size_t i = 1; i < full.size() && i <= j; ++i) v += -full[i] * psi[j - i];
        psi[j] = v;
    }
    return psi;
}

ForecastResult forecast(const ArimaxFit& fit, std::size_t horizon, std::optional<std::span<const double>> future_x) {
    if (horizon == 0) throw HorizonZero("forecast horizon must be >= 1");
    if (future_x && future_x->size() != horizon) {
        throw LengthMismatch("future regressor has " + std::to_string(future_x->size()) + " values for horizon " +
                             std::to_string(horizon));
    }
    ForecastResult out;
    std::vector<double> xf(horizon);
    if (future_x) {
        std::copy(future_x->begin(), future_x->end(), xf.begin());
    } else {
        out.held_at_mean = true;
        const double mean = fit.x.empty() ? 0.0
                                          : std::accumulate(fit.x.begin(), fit.x.end(), 0.0) /
                                                static_cast<double>(fit.x.size());
        std::fill(xf.begin(), xf.end(), mean);
    }

    const std::size_t n = fit.y.size();
    const std::size_t d = fit.spec.d;
    std::vector<double> eta(n);
    for (std::size_t t = 0; t < n; ++t) eta[t] = fit.y[t] - fit.beta * fit.x[t] - fit.intercept;
    auto w = difference(eta, d);
    std::vector<double> e(fit.residuals.size());
    for (std::size_t t = 0; t < e.size(); ++t) e[t] = fit.residuals[t].value;

    const std::size_t m = w.size();
    w.resize(m + horizon, 0.0);
    e.resize(m + horizon, 0.0);
    for (std::size_t h = 0; h < horizon; ++h) {
        const std::size_t t = m + h;
        double v = 0.0;
        for (std::size_t i = 0; i < fit.phi.size() && i < t; ++i) v += fit.phi[i] * w[t - 1 - i];
        for (std::size_t j = 0; j < fit.theta.size() && j < t; ++j) v += fit.theta[j] * e[t - 1 - j];
        w[t] = v;
    }
    const auto diff = binomial_difference(d);
    eta.resize(n + horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        const std::size_t t = n + h;
        double v = w[m + h];
        for (std::size_t k = 1; k <= d; ++k) v -= diff[k] * eta[t - k];
        eta[t] = v;
    }

    const auto psi = psi_weights(fit, horizon);
    const boost::math::normal normal;
    const double z80 = boost::math::quantile(normal, 0.90);
    const double z95 = boost::math::quantile(normal, 0.975);
    double cum = 0.0;
    out.steps.reserve(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        cum += psi[h] * psi[h];
        ForecastStep s;
        s.step = h + 1;
        s.x = xf[h];
        s.point = fit.beta * xf[h] + fit.intercept + eta[n + h];
        s.se = std::sqrt(fit.sigma2 * cum);
        s.lo80 = s.point - z80 * s.se;
        s.hi80 = s.point + z80 * s.se;
        s.lo95 = s.point - z95 * s.se;
        s.hi95 = s.point + z95 * s.se;
        out.steps.push_back(s);
    }
    return out;
}

}  // namespace entrovol::arimax
