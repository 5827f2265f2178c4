#pragma once

// SNAIL-terminated quarter-wave resonator: external flux and microscopic
// circuit parameters mapped to the mode frequency, the zero-point phase
// amplitude and the static / flux-modulated nonlinear coefficients.
//
// Units: external flux is in flux quanta (Phi0), the SNAIL phase in radians,
// frequencies and coefficients in angular units (rad/s). Inside the potential
// the flux enters as 2*pi*phi_e.

#include <vector>

namespace snail {

/// hbar / (2e)^2 in ohms; converts the resonator impedance into the
/// dimensionless unit system where hbar = 2e = 1.
inline constexpr double kImpedanceUnitOhm = 1.054571817e-34 / (4.0 * 1.602176634e-19 * 1.602176634e-19);
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct CircuitParams {
    double beta = 0.097;             // small/large junction asymmetry
    double ej_ghz = 245.0;           // large-junction E_J / h in GHz
    int n_junctions = 3;             // number of large junctions
    double omega_inf = kTwoPi * 8.99e9;  // bare quarter-wave mode, rad/s
    double impedance = 57.94;        // bare resonator impedance, ohm

    /// E_J in rad/s.
    double ej_angular() const { return kTwoPi * ej_ghz * 1e9; }
    /// Throws std::invalid_argument naming the violated invariant.
    void validate() const;
};

/// Parameters of the measured device.
CircuitParams device_params();

/// Map flux to the representative in [-0.5, 0.5).
double reduce_flux(double phi_e);

/// U/E_J = -(beta cos(phi) + n cos((phi_e_rad - phi)/n)).
double potential(double phi, double phi_e_rad, const CircuitParams& p);
/// k-th partial derivative of U/E_J with respect to phi.
double potential_derivative(int k, double phi, double phi_e_rad, const CircuitParams& p);
/// d/d(phi_e_rad) of the k-th phi-derivative of U/E_J, phi held fixed.
double potential_flux_derivative(int k, double phi, double phi_e_rad, const CircuitParams& p);

/// Global minimum of the potential for flux phi_e (reduced to one period).
/// Satisfies beta sin(phi_m) = sin((phi_e - phi_m)/n) to 1e-12.
double potential_minimum(double phi_e, const CircuitParams& p);

/// c[k] = d^k(U/E_J)/dphi^k at the minimum, k = 0..max_order (c[0] is U/E_J).
std::vector<double> potential_derivatives(double phi_e, const CircuitParams& p, int max_order = 6);

struct ModeSolution {
    double omega0 = 0.0;         // dressed mode frequency, rad/s
    double l_j = 0.0;            // SNAIL linear inductance, henry
    double participation = 0.0;  // zero-point phase amplitude of the SNAIL node
};

/// Solve omega0/omega_inf = (2/pi) atan(Z / (L_J omega0)) and evaluate the
/// participation of the SNAIL phase in the fundamental mode.
ModeSolution resonator_frequency(double phi_e, const CircuitParams& p);

/// Same, but from a precomputed c2 (curvature at the minimum).
ModeSolution resonator_frequency_from_curvature(double c2, const CircuitParams& p);

/// d(omega0)/d(phi_e) in rad/s per Phi0, central difference of the implicit solve.
double frequency_slope(double phi_e, const CircuitParams& p, double step = 1e-6);

struct TaylorCoefficients {
    double phi_e = 0.0;           // Phi0
    double phi_m = 0.0;           // rad
    std::vector<double> c;        // c[k], k = 0..n_max
    std::vector<double> g_dc;     // rad/s, g_dc[1] = g_dc[2] = 0
    std::vector<double> g_ac;     // rad/s per Phi0 of ac flux, g_ac[0] unused
    double omega0 = 0.0;          // rad/s
    double participation = 0.0;
    double l_j = 0.0;

    int n_max() const { return static_cast<int>(g_dc.size()) - 1; }
};

/// g_n^dc = E_J Phi^n/n! c_n and g_n^ac = E_J Phi^n/n! * 2pi * dc_n/dphi_e
/// (partial derivative at the static minimum).
TaylorCoefficients hamiltonian_coefficients(double phi_e, const CircuitParams& p, int n_max = 6);

}  // namespace snail
