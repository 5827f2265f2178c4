#pragma once

#include <functional>
#include <vector>

namespace snail {

struct SimplexOptions {
    std::vector<double> initial_step;  // per-coordinate simplex edge; empty -> 0.1
    double spread_tol = 1e-5;          // stop when every vertex is this close to the best
    double value_tol = 1e-12;
    int max_evaluations = 2000;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Nelder-Mead downhill simplex (standard reflection / expansion /
/// contraction / shrink coefficients 1, 2, 1/2, 1/2).
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, const SimplexOptions& opts = {});

}  // namespace snail
