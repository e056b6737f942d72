#include "entrovol/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace entrovol::optim {

namespace {

struct Simplex {
    std::vector<std::vector<double>> vertices;
    std::vector<double> values;

    void sort() {
        std::vector<std::size_t> order(values.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<std::vector<double>> v2;
        std::vector<double> f2;
        for (auto i : order) {
            v2.push_back(std::move(vertices[i]));
            f2.push_back(values[i]);
        }
        vertices = std::move(v2);
        values = std::move(f2);
    }
};

double safe(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::max(); }

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start, const NelderMeadOptions& options) {
    const std::size_t dim = start.size();
    NelderMeadResult result;
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        return safe(f(x));
    };
    if (dim == 0) {
        result.x = start;
        result.value = eval(start);
        result.converged = true;
        return result;
    }

    std::vector<double> best = std::move(start);
    double best_value = eval(best);
    for (std::size_t round = 0; round <= options.restarts; ++round) {
        Simplex s;
        s.vertices.push_back(best);
        s.values.push_back(best_value);
        for (std::size_t i = 0; i < dim; ++i) {
            auto v = best;
            const double step = v[i] != 0.0 ? options.initial_step * std::max(std::fabs(v[i]), 0.1)
                                            : options.initial_step;
            v[i] += step;
            s.values.push_back(eval(v));
            s.vertices.push_back(std::move(v));
        }

        bool converged = false;
        std::vector<double> centroid(dim), trial(dim), trial2(dim);
        while (result.evaluations < options.max_evaluations) {
            s.sort();
            const double fbest = s.values.front(), fworst = s.values.back();
            double spread = 0.0;
            for (std::size_t i = 1; i <= dim; ++i) {
                for (std::size_t k = 0; k < dim; ++k) {
                    spread = std::max(spread, std::fabs(s.vertices[i][k] - s.vertices[0][k]));
                }
            }
            if (std::fabs(fworst - fbest) <= options.f_tolerance * (std::fabs(fbest) + 1e-300) ||
                spread <= options.x_tolerance) {
                converged = true;
                break;
            }

            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t i = 0; i < dim; ++i) {
                for (std::size_t k = 0; k < dim; ++k) centroid[k] += s.vertices[i][k];
            }
            for (auto& c : centroid) c /= static_cast<double>(dim);

            const auto& worst = s.vertices.back();
            for (std::size_t k = 0; k < dim; ++k) trial[k] = centroid[k] + (centroid[k] - worst[k]);
            const double fr = eval(trial);

            if (fr < s.values.front()) {
                for (std::size_t k = 0; k < dim; ++k) trial2[k] = centroid[k] + 2.0 * (centroid[k] - worst[k]);
                const double fe = eval(trial2);
                if (fe < fr) {
                    s.vertices.back() = trial2;
                    s.values.back() = fe;
                } else {
                    s.vertices.back() = trial;
                    s.values.back() = fr;
                }
                continue;
            }
            if (fr < s.values[dim - 1]) {
                s.vertices.back() = trial;
                s.values.back() = fr;
                continue;
            }
            // contraction: outside if the reflection beat the worst, inside otherwise
            const bool outside = fr < s.values.back();
            for (std::size_t k = 0; k < dim; ++k) {
                trial2[k] = outside ? centroid[k] + 0.5 * (trial[k] - centroid[k])
                                    : centroid[k] + 0.5 * (worst[k] - centroid[k]);
            }
            const double fc = eval(trial2);
            if (fc < std::min(fr, s.values.back())) {
                s.vertices.back() = trial2;
                s.values.back() = fc;
                continue;
            }
            for (std::size_t i = 1; i <= dim; ++i) {
                for (std::size_t k = 0; k < dim; ++k) {
                    s.vertices[i][k] = s.vertices[0][k] + 0.5 * (s.vertices[i][k] - s.vertices[0][k]);
                }
                s.values[i] = eval(s.vertices[i]);
            }
        }
        s.sort();
        const bool improved = s.values.front() < best_value;
        if (s.values.front() <= best_value) {
            best = s.vertices.front();
            best_value = s.values.front();
        }
        result.converged = converged;
        if (!converged) break;
        if (round > 0 && !improved) break;
    }
    result.x = std::move(best);
    result.value = best_value;
    return result;
}

}  // namespace entrovol::optim
