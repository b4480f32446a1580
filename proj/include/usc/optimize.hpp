// optimize.hpp - derivative-free minimisation used by gate calibration
#pragma once

#include <functional>
#include <vector>

namespace usc {

struct MinimizeResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
};

/// Nelder-Mead simplex (GSL nmsimplex2). `step` sets the initial simplex size
/// per coordinate; stops when the simplex size drops below `size_tol`.
MinimizeResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> x0, std::vector<double> step,
                           double size_tol = 1e-8, int max_iter = 2000);

}  // namespace usc
