#include "snail/effective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "snail/numerics.hpp"
#include "snail/operators.hpp"

namespace snail {

EffectiveCoefficients effective_static(const TaylorCoefficients& coeffs) {
    if (coeffs.n_max() < 4) throw std::invalid_argument("effective_static: needs g_dc up to n=4");
    const double g3 = coeffs.g_dc[3], g4 = coeffs.g_dc[4];
    const double shift = 12.0 * g4 - 60.0 * g3 * g3 / coeffs.omega0;
    return {shift, shift};
}

double kerr_at(double phi_e, const CircuitParams& p, int n_max) {
    return effective_static(hamiltonian_coefficients(phi_e, p, n_max)).k1;
}

double find_kerr_free_flux(const CircuitParams& p, double lo, double hi, int n_max) {
    if (lo > hi) std::swap(lo, hi);
    auto k = [&](double x) { return kerr_at(x, p, n_max); };
    const double klo = k(lo), khi = k(hi);
    if ((klo > 0) == (khi > 0)) {
        std::ostringstream msg;
        msg << "find_kerr_free_flux: K1 has no sign change on [" << lo << ", " << hi
            << "]; widen the bracket";
        throw SolverError(msg.str());
    }
    return brent_root(k, lo, hi, {1e-12, 1e-15, 200}).root;
}

NumericKerr numeric_kerr_oracle(const TaylorCoefficients& coeffs, int dim) {
    if (dim < 20) throw std::invalid_argument("numeric_kerr_oracle: dim >= 20");
    RMatrix h = RMatrix::Zero(dim, dim);
    for (int j = 0; j < dim; ++j) h(j, j) = coeffs.omega0 * j;
    for (int k = 3; k <= coeffs.n_max(); ++k) {
        if (coeffs.g_dc[k] != 0.0) h += coeffs.g_dc[k] * quadrature_power(dim, k);
    }
    // Work relative to omega0 to keep the eigensolver well scaled.
    const double scale = coeffs.omega0;
    Eigen::SelfAdjointEigenSolver<RMatrix> es(h / scale);
    if (es.info() != Eigen::Success) throw SolverError("numeric_kerr_oracle: eigensolver failed");

    NumericKerr out;
    std::vector<int> taken;
    for (int level = 0; level < 4; ++level) {
        int best = -1;
        double best_overlap = -1.0;
        for (int e = 0; e < dim; ++e) {
            if (std::find(taken.begin(), taken.end(), e) != taken.end()) continue;
            const double ov = es.eigenvectors()(level, e) * es.eigenvectors()(level, e);
            // eigenvalues are sorted ascending, so a strict > keeps the lower energy on ties
            if (ov > best_overlap) {
                best_overlap = ov;
                best = e;
            }
        }
        if (best_overlap < 0.5) {
            std::ostringstream msg;
            msg << "numeric_kerr_oracle: ambiguous level " << level << " (max overlap "
                << best_overlap << "); increase dim or reduce coupling";
            throw SolverError(msg.str());
        }
        taken.push_back(best);
        out.levels.push_back(es.eigenvalues()(best) * scale);
    }
    out.k1 = out.levels[2] - 2.0 * out.levels[1] + out.levels[0];
    out.delta_omega = out.levels[1] - out.levels[0] - coeffs.omega0;
    return out;
}

double drift_angle(double a_mag, double t, const EffectiveCoefficients& eff,
                   const std::vector<double>& k_higher) {
    const double a2 = a_mag * a_mag;
    double rate = eff.delta_omega + eff.k1 * a2;
    double pw = a2;
    for (double k : k_higher) {
        pw *= a2;
        rate += k * pw;
    }
    return -rate * t;
}

DriveRates drive_rates(const TaylorCoefficients& coeffs, double omega_d) {
    if (coeffs.n_max() < 3) throw std::invalid_argument("drive_rates: needs coefficients up to n=3");
    DriveRates r;
    r.alpha_rate = coeffs.g_ac[1] / 2.0;
    r.zeta_rate = coeffs.g_ac[2] + 3.0 * coeffs.g_ac[1] * coeffs.g_dc[3] / omega_d;
    r.tau_rate = coeffs.g_ac[3] / 2.0;
    return r;
}

}  // namespace snail
