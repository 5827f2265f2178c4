#pragma once

// Leading-order rotating-wave effective quantities: static frequency shift and
// Kerr, the Kerr-free operating flux, coherent-state drift and drive rates.
// The exact-diagonalization Kerr oracle lives here as the independent check of
// the perturbative formulas.

#include <utility>
#include <vector>

#include "snail/circuit.hpp"

namespace snail {

struct EffectiveCoefficients {
    double delta_omega = 0.0;  // omega_r - omega0, rad/s
    double k1 = 0.0;           // Kerr K^(1), rad/s
};

/// delta_omega = K^(1) = 12 g4 - 60 g3^2 / omega0 (leading order).
EffectiveCoefficients effective_static(const TaylorCoefficients& coeffs);

/// Kerr K^(1) as a function of flux.
double kerr_at(double phi_e, const CircuitParams& p, int n_max = 6);

/// Root of K^(1)(phi_e) inside [lo, hi]; throws SolverError without a sign change.
double find_kerr_free_flux(const CircuitParams& p, double lo, double hi, int n_max = 6);

struct NumericKerr {
    double k1 = 0.0;            // E2 - 2E1 + E0, rad/s
    double delta_omega = 0.0;   // E1 - E0 - omega0, rad/s
    std::vector<double> levels; // E0, E1, E2 (+ E3), rad/s
};

/// Diagonalize omega0 n + sum_{n>=3} g_n^dc (a + a^dag)^n in a dim-level Fock
/// space and read the Kerr from the levels with maximal bare-state overlap.
NumericKerr numeric_kerr_oracle(const TaylorCoefficients& coeffs, int dim = 40);

/// theta = -(delta_omega + sum_n K^(n) |a|^{2n}) t in the frame rotating at omega0.
/// k_higher holds K^(2), K^(3), ... (optional).
double drift_angle(double a_mag, double t, const EffectiveCoefficients& eff,
                   const std::vector<double>& k_higher = {});

struct DriveRates {
    double alpha_rate = 0.0;  // |alpha| / (phi_ac T), rad/s per Phi0
    double zeta_rate = 0.0;   // |zeta|  / (phi_ac T)
    double tau_rate = 0.0;    // |tau|   / (phi_ac T)
};

/// Leading-order drive rates per unit ac flux and effective gate time:
/// alpha = g1ac/2, zeta = g2ac + 3 g1ac g3dc / omega_d, tau = g3ac/2.
DriveRates drive_rates(const TaylorCoefficients& coeffs, double omega_d);

}  // namespace snail
