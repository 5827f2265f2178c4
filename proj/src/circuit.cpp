#include "snail/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "snail/numerics.hpp"

namespace snail {

namespace {

// d^j/du^j cos(u)
double cos_derivative(int j, double u) { return std::cos(u + 0.5 * kPi * j); }

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

}  // namespace

void CircuitParams::validate() const {
    if (n_junctions < 1) throw std::invalid_argument("circuit: n_junctions >= 1 violated");
    if (!(beta > 0.0) || !(beta < 1.0 / n_junctions))
        throw std::invalid_argument("circuit: 0 < beta < 1/n_junctions violated");
    if (!(ej_ghz > 0.0)) throw std::invalid_argument("circuit: ej > 0 violated");
    if (!(omega_inf > 0.0)) throw std::invalid_argument("circuit: omega_inf > 0 violated");
    if (!(impedance > 0.0)) throw std::invalid_argument("circuit: impedance > 0 violated");
}

CircuitParams device_params() { return CircuitParams{}; }

double reduce_flux(double phi_e) { return phi_e - std::floor(phi_e + 0.5); }

double potential(double phi, double phi_e_rad, const CircuitParams& p) {
    const double n = p.n_junctions;
    return -(p.beta * std::cos(phi) + n * std::cos((phi_e_rad - phi) / n));
}

double potential_derivative(int k, double phi, double phi_e_rad, const CircuitParams& p) {
    const double n = p.n_junctions;
    const double u = (phi_e_rad - phi) / n;
    return -p.beta * cos_derivative(k, phi) - n * std::pow(-1.0 / n, k) * cos_derivative(k, u);
}

double potential_flux_derivative(int k, double phi, double phi_e_rad, const CircuitParams& p) {
    const double n = p.n_junctions;
    const double u = (phi_e_rad - phi) / n;
    return -std::pow(-1.0 / n, k) * cos_derivative(k + 1, u);
}

double potential_minimum(double phi_e, const CircuitParams& p) {
    if (!std::isfinite(phi_e)) throw std::invalid_argument("potential_minimum: flux must be finite");
    const double pe = kTwoPi * reduce_flux(phi_e);
    auto dU = [&](double x) { return potential_derivative(1, x, pe, p); };

    // The well is single within one 2*pi*n period; scanning slightly more than
    // [-pi, pi] catches the minimum for every reduced flux.
    constexpr int kGrid = 400;
    const double lo = -kPi - 0.5, hi = kPi + 0.5;
    const double dx = (hi - lo) / kGrid;
    double best_phi = 0.0, best_u = std::numeric_limits<double>::infinity();
    bool found = false;
    double x0 = lo, f0 = dU(x0);
    for (int i = 1; i <= kGrid; ++i) {
        const double x1 = lo + i * dx, f1 = dU(x1);
        double cand = 0.0;
        bool have = false;
        if (f0 < 0.0 && f1 >= 0.0) {
            cand = (f1 == 0.0) ? x1 : brent_root(dU, x0, x1, {1e-16, 1e-16, 200}).root;
            have = true;
        }
        if (have && potential_derivative(2, cand, pe, p) > 0.0) {
            const double u = potential(cand, pe, p);
            if (u < best_u) {
                best_u = u;
                best_phi = cand;
                found = true;
            }
        }
        x0 = x1;
        f0 = f1;
    }
    if (!found) {
        std::ostringstream msg;
        msg << "potential_minimum: no stable stationary point for phi_e=" << phi_e
            << " beta=" << p.beta;
        throw SolverError(msg.str());
    }
    const double residual = std::abs(dU(best_phi));
    if (residual > 1e-12) {
        std::ostringstream msg;
        msg << "potential_minimum: residual " << residual << " above 1e-12 at phi_e=" << phi_e;
        throw SolverError(msg.str());
    }
    return best_phi;
}

std::vector<double> potential_derivatives(double phi_e, const CircuitParams& p, int max_order) {
    if (max_order < 2) throw std::invalid_argument("potential_derivatives: max_order >= 2");
    const double pm = potential_minimum(phi_e, p);
    const double pe = kTwoPi * reduce_flux(phi_e);
    std::vector<double> c(max_order + 1);
    c[0] = potential(pm, pe, p);
    for (int k = 1; k <= max_order; ++k) c[k] = potential_derivative(k, pm, pe, p);
    return c;
}

ModeSolution resonator_frequency_from_curvature(double c2, const CircuitParams& p) {
    if (!(c2 > 0.0)) throw SolverError("resonator_frequency: non-positive curvature c2");
    const double z = p.impedance / kImpedanceUnitOhm;
    // Z/(L_J omega) with 1/L_J = E_J c2 in hbar = 2e = 1 units.
    const double coupling = z * p.ej_angular() * c2;
    const double winf = p.omega_inf;
    auto f = [&](double w) { return w / winf - (2.0 / kPi) * std::atan(coupling / w); };
    const auto r = brent_root(f, winf * 1e-12, winf, {0.0, 1e-16, 200});

    ModeSolution out;
    out.omega0 = r.root;
    constexpr double kHbar = 1.054571817e-34, kE = 1.602176634e-19, kH = 6.62607015e-34;
    const double flux_unit = kHbar / (2.0 * kE);
    out.l_j = flux_unit * flux_unit / (kH * p.ej_ghz * 1e9 * c2);
    const double x = kPi * out.omega0 / winf;
    const double sinc = std::sin(x) / x;
    out.participation = std::sqrt(z / x * (1.0 + std::cos(x)) / (1.0 + sinc));
    return out;
}

ModeSolution resonator_frequency(double phi_e, const CircuitParams& p) {
    const auto c = potential_derivatives(phi_e, p, 2);
    return resonator_frequency_from_curvature(c[2], p);
}

double frequency_slope(double phi_e, const CircuitParams& p, double step) {
    const double up = resonator_frequency(phi_e + step, p).omega0;
    const double dn = resonator_frequency(phi_e - step, p).omega0;
    return (up - dn) / (2.0 * step);
}

TaylorCoefficients hamiltonian_coefficients(double phi_e, const CircuitParams& p, int n_max) {
    if (n_max < 3) throw std::invalid_argument("hamiltonian_coefficients: n_max >= 3");
    TaylorCoefficients t;
    t.phi_e = phi_e;
    t.phi_m = potential_minimum(phi_e, p);
    const double pe = kTwoPi * reduce_flux(phi_e);
    t.c.resize(n_max + 1);
    t.c[0] = potential(t.phi_m, pe, p);
    for (int k = 1; k <= n_max; ++k) t.c[k] = potential_derivative(k, t.phi_m, pe, p);

    const auto mode = resonator_frequency_from_curvature(t.c[2], p);
    t.omega0 = mode.omega0;
    t.participation = mode.participation;
    t.l_j = mode.l_j;

    const double ej = p.ej_angular();
    t.g_dc.assign(n_max + 1, 0.0);
    t.g_ac.assign(n_max + 1, 0.0);
    double phin = 1.0;
    for (int k = 1; k <= n_max; ++k) {
        phin *= t.participation;
        const double scale = ej * phin / factorial(k);
        if (k >= 3) t.g_dc[k] = scale * t.c[k];
        t.g_ac[k] = scale * kTwoPi * potential_flux_derivative(k, t.phi_m, pe, p);
    }
    return t;
}

}  // namespace snail
