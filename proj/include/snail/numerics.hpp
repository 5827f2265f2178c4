#pragma once

// Scalar root finding and 1-D minimization shared by the circuit, effective
// and protocol layers.

#include <functional>
#include <stdexcept>
#include <string>

namespace snail {

/// Raised when an iterative solver cannot produce a result.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RootResult {
    double root = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

struct RootOptions {
    double xtol = 1e-14;   // absolute bracket width target
    double rtol = 1e-15;   // relative bracket width target
    int max_iter = 200;
};

/// Brent's bracketed root finder (bisection / secant / inverse quadratic).
/// Requires f(lo) and f(hi) of opposite sign (or one of them zero).
RootResult brent_root(const std::function<double(double)>& f, double lo, double hi,
                      const RootOptions& opts = {});

struct MinResult {
    double x = 0.0;
    double value = 0.0;
    int iterations = 0;
};

/// Golden-section minimization of a unimodal function on [lo, hi].
MinResult golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                             double xtol = 1e-8, int max_iter = 200);

/// Vertex of the parabola through three points (x1 < x2 < x3).
double parabola_vertex(double x1, double y1, double x2, double y2, double x3, double y3);

}  // namespace snail
