#include "snail/levmar.hpp"

#include <cmath>
#include <limits>

#include "snail/numerics.hpp"

namespace snail {

Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& fx, double rel) {
    Eigen::MatrixXd j(fx.size(), x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        Eigen::VectorXd xp = x;
        const double h = rel * std::max(std::abs(x(k)), 1e-8);
        xp(k) += h;
        j.col(k) = (f(xp) - fx) / (xp(k) - x(k));
    }
    return j;
}

LevMarResult levenberg_marquardt(const ResidualFn& f, Eigen::VectorXd x0, const LevMarOptions& opts,
                                 const FeasibleFn& feasible) {
    LevMarResult out;
    out.x = std::move(x0);
    out.residual = f(out.x);
    if (!out.residual.allFinite()) throw SolverError("levenberg_marquardt: non-finite residual at the guess");
    out.cost = out.residual.squaredNorm();
    out.history.push_back(out.cost);

    double lambda = opts.lambda0;
    const Eigen::Index n = out.x.size();
    for (int it = 0; it < opts.max_iter; ++it) {
        out.iterations = it + 1;
        out.jacobian = numeric_jacobian(f, out.x, out.residual, opts.fd_step);
        const Eigen::MatrixXd jtj = out.jacobian.transpose() * out.jacobian;
        const Eigen::VectorXd grad = out.jacobian.transpose() * out.residual;
        if (grad.cwiseAbs().maxCoeff() == 0.0) {
            out.converged = true;
            out.message = "zero gradient";
            return out;
        }

        bool accepted = false;
        for (int tries = 0; tries < 30; ++tries) {
            Eigen::MatrixXd a = jtj;
            for (Eigen::Index k = 0; k < n; ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-300);
            const Eigen::VectorXd step = a.ldlt().solve(-grad);
            if (!step.allFinite()) {
                lambda *= opts.lambda_up;
                continue;
            }
            const Eigen::VectorXd trial = out.x + step;
            if (feasible && !feasible(trial)) {
                lambda *= opts.lambda_up;
                continue;
            }
            const Eigen::VectorXd r = f(trial);
            const double c = r.allFinite() ? r.squaredNorm() : std::numeric_limits<double>::infinity();
            if (c <= out.cost) {
                const double drop = out.cost - c;
                const double rel_step = step.norm() / std::max(out.x.norm(), 1e-300);
                out.x = trial;
                out.residual = r;
                out.cost = c;
                out.history.push_back(c);
                lambda = std::max(lambda * opts.lambda_down, 1e-15);
                accepted = true;
                if (drop <= opts.cost_rtol * std::max(c, 1e-300) || rel_step < opts.step_rtol || c == 0.0) {
                    out.jacobian = numeric_jacobian(f, out.x, out.residual, opts.fd_step);
                    out.converged = true;
                    out.message = "converged";
                    return out;
                }
                break;
            }
            lambda *= opts.lambda_up;
        }
        if (!accepted) {
            // No downhill step at any damping: we sit at a (numerical) minimum.
            out.converged = true;
            out.message = "no further decrease";
            return out;
        }
    }
    out.message = "iteration cap reached";
    return out;
}

}  // namespace snail
