#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace entrovol::optim {

struct NelderMeadOptions {
    std::size_t max_evaluations = 20000;
    double f_tolerance = 1e-10;  // relative spread of simplex values
    double x_tolerance = 1e-8;   // max vertex distance from the best vertex
    double initial_step = 0.1;
    std::size_t restarts = 1;    // re-seed the simplex at the optimum this many times
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Derivative-free simplex minimisation (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2). Deterministic for a given start.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start,
                             const NelderMeadOptions& options = {});

}  // namespace entrovol::optim
