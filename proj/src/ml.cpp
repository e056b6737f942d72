#include "entrovol/ml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>
#include <unordered_map>

#include "entrovol/error.hpp"

namespace entrovol::ml {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// LRU cache of RBF kernel rows K(x_u, .) over the training set.
class KernelCache {
public:
    KernelCache(std::span<const double> x, double gamma, std::size_t cache_mb) : x_(x), gamma_(gamma) {
        const std::size_t row_bytes = std::max<std::size_t>(x.size(), 1) * sizeof(double);
        capacity_ = std::max<std::size_t>(2, cache_mb * 1024 * 1024 / row_bytes);
        capacity_ = std::min(capacity_, x.size());
        pool_.resize(capacity_ * x.size());
        slot_of_.assign(x.size(), -1);
        owner_.assign(capacity_, -1);
    }

    const double* row(std::size_t u) {
        const int slot = slot_of_[u];
        if (slot >= 0) {
            lru_.splice(lru_.begin(), lru_, pos_[static_cast<std::size_t>(slot)]);
            return &pool_[static_cast<std::size_t>(slot) * x_.size()];
        }
        std::size_t target;
        if (used_ < capacity_) {
            target = used_++;
            lru_.push_front(target);
            pos_.push_back(lru_.begin());
        } else {
            target = lru_.back();
            slot_of_[static_cast<std::size_t>(owner_[target])] = -1;
            lru_.splice(lru_.begin(), lru_, pos_[target]);
        }
        owner_[target] = static_cast<long>(u);
        slot_of_[u] = static_cast<int>(target);
        double* out = &pool_[target * x_.size()];
        const double xu = x_[u];
        const auto n = static_cast<long>(x_.size());
#pragma omp parallel for schedule(static) if (n > 4096)
        for (long v = 0; v < n; ++v) {
            const double d = xu - x_[static_cast<std::size_t>(v)];
            out[v] = std::exp(-gamma_ * d * d);
        }
        return out;
    }

private:
    std::span<const double> x_;
    double gamma_;
    std::size_t capacity_ = 0;
    std::size_t used_ = 0;
    std::vector<double> pool_;
    std::vector<int> slot_of_;
    std::vector<long> owner_;
    std::list<std::size_t> lru_;
    std::vector<std::list<std::size_t>::iterator> pos_;
};

void validate_svr(const SvrParams& p) {
    if (!(p.c > 0.0)) throw InvalidHyperparameter("SVR penalty c must be > 0");
    if (!(p.epsilon >= 0.0)) throw InvalidHyperparameter("SVR epsilon must be >= 0");
    if (!(p.gamma > 0.0)) throw InvalidHyperparameter("SVR gamma must be > 0");
    if (!(p.tolerance > 0.0)) throw InvalidHyperparameter("SVR tolerance must be > 0");
}

SupervisedSet slice(const SupervisedSet& s, std::size_t begin, std::size_t end) {
    SupervisedSet out;
    out.x.assign(s.x.begin() + static_cast<std::ptrdiff_t>(begin), s.x.begin() + static_cast<std::ptrdiff_t>(end));
    out.y.assign(s.y.begin() + static_cast<std::ptrdiff_t>(begin), s.y.begin() + static_cast<std::ptrdiff_t>(end));
    out.dates.assign(s.dates.begin() + static_cast<std::ptrdiff_t>(begin),
                     s.dates.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

}  // namespace

void SupervisedSet::validate() const {
    if (x.size() != y.size() || x.size() != dates.size()) throw LengthMismatch("supervised set columns differ in length");
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (!(dates[i - 1] < dates[i])) throw NonMonotonicDates("supervised set dates must increase at " + dates[i].iso());
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidConfig("supervised set holds a non-finite value");
    }
}

SupervisedSet build_supervised(const series::RollingSeries& target, const series::RollingSeries& feature,
                               std::size_t* dropped) {
    std::unordered_map<long, std::size_t> by_date;
    for (std::size_t i = 0; i < feature.points.size(); ++i) by_date[feature.points[i].date.days_since_epoch()] = i;
    SupervisedSet out;
    std::size_t skipped = 0;
    for (const auto& t : target.points) {
        const auto it = by_date.find(t.date.days_since_epoch());
        if (it == by_date.end()) {
            ++skipped;
            continue;
        }
        const auto& f = feature.points[it->second];
        if (!t.defined || !f.defined || !std::isfinite(t.value) || !std::isfinite(f.value)) {
            ++skipped;
            continue;
        }
        out.x.push_back(f.value);
        out.y.push_back(t.value);
        out.dates.push_back(t.date);
    }
    if (dropped) *dropped = skipped;
    return out;
}

ChronoSplit chrono_split(const SupervisedSet& data, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidConfig("split ratio must lie in (0, 1)");
    data.validate();
    if (data.size() < 10) throw TooShort("need at least 10 points to split, got " + std::to_string(data.size()));
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(data.size())));
    ChronoSplit out;
    out.ratio = ratio;
    out.train = slice(data, 0, n_train);
    out.test = slice(data, n_train, data.size());
    return out;
}

Scaler Scaler::fit(std::span<const double> v) {
    Scaler s;
    if (v.empty()) return s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    s.std = sd > 0.0 ? sd : 1.0;
    return s;
}

LinearModel fit_ols(const SupervisedSet& train) {
    const auto n = static_cast<double>(train.size());
    if (train.size() < 2) throw TooShort("OLS needs at least 2 points");
    const double mx = std::accumulate(train.x.begin(), train.x.end(), 0.0) / n;
    const double my = std::accumulate(train.y.begin(), train.y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) {
        sxx += (train.x[i] - mx) * (train.x[i] - mx);
        sxy += (train.x[i] - mx) * (train.y[i] - my);
    }
    if (sxx == 0.0) throw ConstantFeature("OLS feature is constant");
    LinearModel m;
    m.slope = sxy / sxx;
    m.intercept = my - m.slope * mx;
    return m;
}

SvrSolution solve_svr_dual(std::span<const double> x, std::span<const double> y, const SvrParams& params) {
    validate_svr(params);
    if (x.size() != y.size()) throw LengthMismatch("SVR feature and target lengths differ");
    if (x.empty()) throw TooShort("SVR needs at least one training point");
    const std::size_t l = x.size();
    const std::size_t n = 2 * l;
    const double c = params.c;

    // Variables 0..l-1 carry alpha (sign +1), l..2l-1 carry alpha* (sign -1).
    std::vector<double> a(n, 0.0), grad(n);
    std::vector<signed char> sign(n);
    for (std::size_t t = 0; t < l; ++t) {
        sign[t] = 1;
        sign[t + l] = -1;
        grad[t] = params.epsilon - y[t];
        grad[t + l] = params.epsilon + y[t];
    }
    KernelCache cache(x, params.gamma, params.cache_mb);

    SvrSolution sol;
    std::size_t iter = 0;
    double violation = kInf;
    while (true) {
        // i: maximal violating index in I_up
        double gmax = -kInf;
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (sign[t] == 1) {
                if (a[t] < c && -grad[t] >= gmax) {
                    gmax = -grad[t];
                    i = t;
                }
            } else if (a[t] > 0.0 && grad[t] >= gmax) {
                gmax = grad[t];
                i = t;
            }
        }
        double gmax2 = -kInf;
        std::size_t j = n;
        if (i < n) {
            const double* ki = cache.row(i % l);
            double obj_min = kInf;
            for (std::size_t t = 0; t < n; ++t) {
                const double kit = ki[t % l];
                if (sign[t] == 1) {
                    if (a[t] > 0.0) {
                        const double diff = gmax + grad[t];
                        gmax2 = std::max(gmax2, grad[t]);
                        if (diff > 0.0) {
                            const double quad = 2.0 - 2.0 * kit;
                            const double obj = -(diff * diff) / std::max(quad, kTau);
                            if (obj <= obj_min) {
                                obj_min = obj;
                                j = t;
                            }
                        }
                    }
                } else if (a[t] < c) {
                    const double diff = gmax - grad[t];
                    gmax2 = std::max(gmax2, -grad[t]);
                    if (diff > 0.0) {
                        const double quad = 2.0 - 2.0 * kit;
                        const double obj = -(diff * diff) / std::max(quad, kTau);
                        if (obj <= obj_min) {
                            obj_min = obj;
                            j = t;
                        }
                    }
                }
            }
        }
        violation = gmax + gmax2;
        if (i == n || j == n || violation < params.tolerance) break;
        if (iter >= params.max_iterations) {
            throw NonConvergence("SMO reached " + std::to_string(params.max_iterations) +
                                 " iterations with KKT violation " + std::to_string(violation));
        }
        ++iter;

        const double* ki = cache.row(i % l);
        const double* kj = cache.row(j % l);
        const double yi = sign[i], yj = sign[j];
        const double qij = yi * yj * ki[j % l];
        const double old_ai = a[i], old_aj = a[j];
        if (yi != yj) {
            double quad = 2.0 + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0.0) {
                if (a[j] < 0.0) {
                    a[j] = 0.0;
                    a[i] = diff;
                }
            } else if (a[i] < 0.0) {
                a[i] = 0.0;
                a[j] = -diff;
            }
            if (diff > 0.0) {
                if (a[i] > c) {
                    a[i] = c;
                    a[j] = c - diff;
                }
            } else if (a[j] > c) {
                a[j] = c;
                a[i] = c + diff;
            }
        } else {
            double quad = 2.0 - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > c) {
                if (a[i] > c) {
                    a[i] = c;
                    a[j] = sum - c;
                }
            } else if (a[j] < 0.0) {
                a[j] = 0.0;
                a[i] = sum;
            }
            if (sum > c) {
                if (a[j] > c) {
                    a[j] = c;
                    a[i] = sum - c;
                }
            } else if (a[i] < 0.0) {
                a[i] = 0.0;
                a[j] = sum;
            }
        }
        const double dai = a[i] - old_ai, daj = a[j] - old_aj;
        const auto nn = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (nn > 8192)
        for (long tt = 0; tt < nn; ++tt) {
            const auto t = static_cast<std::size_t>(tt);
            const double st = sign[t];
            grad[t] += st * (yi * ki[t % l] * dai + yj * kj[t % l] * daj);
        }
    }

    // Offset from free variables, or the midpoint of the feasible interval.
    double ub = kInf, lb = -kInf, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = sign[t] * grad[t];
        if (a[t] >= c) {
            if (sign[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (a[t] <= 0.0) {
            if (sign[t] == 1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

    sol.alpha.resize(l);
    sol.alpha_star.resize(l);
    for (std::size_t t = 0; t < l; ++t) {
        // Only the difference enters the model; keep the complementary representative.
        const double beta = a[t] - a[t + l];
        sol.alpha[t] = std::max(beta, 0.0);
        sol.alpha_star[t] = std::max(-beta, 0.0);
    }
    sol.bias = -rho;
    sol.iterations = iter;
    sol.max_violation = std::max(violation, 0.0);
    return sol;
}

double svr_decision(const SvrSolution& sol, std::span<const double> x, double gamma, double query) {
    double f = sol.bias;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double coef = sol.coef(i);
        if (coef == 0.0) continue;
        const double d = x[i] - query;
        f += coef * std::exp(-gamma * d * d);
    }
    return f;
}

KktAudit audit_kkt(const SvrSolution& sol, std::span<const double> x, std::span<const double> y,
                   const SvrParams& params) {
    KktAudit audit;
    const double c = params.c;
    const double interior = 1e-8 * c;
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = sol.alpha[i], as = sol.alpha_star[i];
        audit.max_box_violation = std::max({audit.max_box_violation, -a, -as, a - c, as - c});
        audit.max_complementarity = std::max(audit.max_complementarity, a * as);
        sum += a - as;
        const bool a_free = a > interior && a < c - interior;
        const bool as_free = as > interior && as < c - interior;
        if (a_free || as_free) {
            const double f = svr_decision(sol, x, params.gamma, x[i]);
            const double gap = a_free ? (y[i] - f) - params.epsilon : (f - y[i]) - params.epsilon;
            audit.max_interior_tube_gap = std::max(audit.max_interior_tube_gap, std::fabs(gap));
        }
    }
    audit.equality_residual = std::fabs(sum);
    audit.ok = audit.max_box_violation <= 1e-12 * c && audit.max_complementarity == 0.0 &&
               audit.equality_residual <= 1e-9 * c * static_cast<double>(std::max<std::size_t>(x.size(), 1)) &&
               audit.max_interior_tube_gap <= params.tolerance + 1e-9;
    return audit;
}

SvrModel::SvrModel(Scaler x_scaler, Scaler y_scaler, std::vector<double> scaled_x, SvrSolution solution,
                   SvrParams params)
    : x_scaler_(x_scaler),
      y_scaler_(y_scaler),
      scaled_x_(std::move(scaled_x)),
      solution_(std::move(solution)),
      params_(params) {}

double SvrModel::predict(double x) const {
    return y_scaler_.inverse(svr_decision(solution_, scaled_x_, params_.gamma, x_scaler_.transform(x)));
}

std::size_t SvrModel::support_vectors() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < scaled_x_.size(); ++i) n += solution_.coef(i) != 0.0 ? 1 : 0;
    return n;
}

SvrModel fit_svr(const SupervisedSet& train, const SvrParams& params) {
    validate_svr(params);
    train.validate();
    const Scaler xs = Scaler::fit(train.x);
    const Scaler ys = Scaler::fit(train.y);
    std::vector<double> zx(train.size()), zy(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        zx[i] = xs.transform(train.x[i]);
        zy[i] = ys.transform(train.y[i]);
    }
    auto sol = solve_svr_dual(zx, zy, params);
    const auto audit = audit_kkt(sol, zx, zy, params);
    if (!audit.ok) {
        throw NonConvergence("SVR KKT audit failed (box " + std::to_string(audit.max_box_violation) + ", tube gap " +
                             std::to_string(audit.max_interior_tube_gap) + ")");
    }
    return SvrModel(xs, ys, std::move(zx), std::move(sol), params);
}

KnnModel::KnnModel(Scaler scaler, std::vector<double> scaled_x, std::vector<double> y, std::size_t k)
    : scaler_(scaler), scaled_x_(std::move(scaled_x)), y_(std::move(y)), k_(k) {}

double KnnModel::predict(double x) const {
    const double z = scaler_.transform(x);
    std::vector<std::pair<double, std::size_t>> dist(scaled_x_.size());
    for (std::size_t i = 0; i < scaled_x_.size(); ++i) dist[i] = {std::fabs(scaled_x_[i] - z), i};
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_ - 1), dist.end());
    std::sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    double s = 0.0;
    for (std::size_t i = 0; i < k_; ++i) s += y_[dist[i].second];
    return s / static_cast<double>(k_);
}

KnnModel fit_knn(const SupervisedSet& train, std::size_t k) {
    if (k < 1 || k > train.size()) {
        throw InvalidK("k = " + std::to_string(k) + " outside [1, " + std::to_string(train.size()) + "]");
    }
    train.validate();
    const Scaler s = Scaler::fit(train.x);
    std::vector<double> zx(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) zx[i] = s.transform(train.x[i]);
    return KnnModel(s, std::move(zx), train.y, k);
}

Metrics compute_metrics(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw LengthMismatch("actual and predicted lengths differ");
    if (actual.empty()) throw TooShort("metrics need at least one point");
    Metrics m;
    double abs_sum = 0.0, sq_sum = 0.0, pct_sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 0.0) throw ZeroActualForMape("actual value at index " + std::to_string(i) + " is zero");
        const double e = actual[i] - predicted[i];
        abs_sum += std::fabs(e);
        sq_sum += e * e;
        pct_sum += std::fabs(e) / std::fabs(actual[i]);
    }
    const auto n = static_cast<double>(actual.size());
    m.mae = abs_sum / n;
    m.mse = sq_sum / n;
    m.rmse = std::sqrt(m.mse);
    m.mape_percent = 100.0 * pct_sum / n;
    return m;
}

const ModelTrace& MetricsReport::model(const std::string& name) const {
    for (const auto& m : models) {
        if (m.model == name) return m;
    }
    throw InvalidConfig("no model named " + name);
}

MetricsReport run_comparison(const SupervisedSet& data, const MlConfig& config) {
    const auto split = chrono_split(data, config.ratio);
    MetricsReport report;
    report.config = config;
    report.train_size = split.train.size();
    report.test_size = split.test.size();
    report.test_dates = split.test.dates;
    report.test_actual = split.test.y;

    report.ols = fit_ols(split.train);
    const auto svr = fit_svr(split.train, config.svr);
    const auto knn = fit_knn(split.train, config.knn_k);
    report.svr_support_vectors = svr.support_vectors();
    report.svr_iterations = svr.solution().iterations;

    const std::size_t n = split.test.size();
    ModelTrace ols{"ols", {}, std::vector<double>(n)};
    ModelTrace svr_t{"svr", {}, std::vector<double>(n)};
    ModelTrace knn_t{"knn", {}, std::vector<double>(n)};
    const auto nl = static_cast<long>(n);
#pragma omp parallel for schedule(static)
    for (long ii = 0; ii < nl; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double x = split.test.x[i];
        ols.predicted[i] = report.ols.predict(x);
        svr_t.predicted[i] = svr.predict(x);
        knn_t.predicted[i] = knn.predict(x);
    }
    for (auto* t : {&ols, &svr_t, &knn_t}) {
        t->metrics = compute_metrics(split.test.y, t->predicted);
        report.models.push_back(std::move(*t));
    }
    return report;
}

}  // namespace entrovol::ml
