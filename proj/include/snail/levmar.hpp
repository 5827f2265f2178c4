#pragma once

// Damped Gauss-Newton (Levenberg-Marquardt) for small dense least-squares
// problems with a forward-difference Jacobian.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace snail {

struct LevMarOptions {
    double fd_step = 1e-7;       // relative forward-difference step
    double lambda0 = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 0.1;
    double cost_rtol = 1e-12;    // stop on relative cost decrease below this
    double step_rtol = 1e-10;    // stop on relative step below this
    int max_iter = 200;
};

struct LevMarResult {
    Eigen::VectorXd x;
    Eigen::VectorXd residual;
    Eigen::MatrixXd jacobian;    // at x
    double cost = 0.0;           // sum of squared residuals
    std::vector<double> history; // accepted costs, non-increasing
    int iterations = 0;
    bool converged = false;
    std::string message;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
/// Optional feasibility test; rejected trial points are treated as failed steps.
using FeasibleFn = std::function<bool(const Eigen::VectorXd&)>;

LevMarResult levenberg_marquardt(const ResidualFn& f, Eigen::VectorXd x0,
                                 const LevMarOptions& opts = {}, const FeasibleFn& feasible = {});

/// Forward-difference Jacobian with per-coordinate step h_i = rel * max(|x_i|, 1e-8).
Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& fx, double rel);

}  // namespace snail
