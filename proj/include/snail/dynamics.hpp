#pragma once

// Time-dependent Lindblad evolution of the driven SNAIL resonator.
//
// The equation of motion is integrated in the frame rotating at omega0
// (interaction picture of omega0 a^dag a). Every other term of the lab-frame
// Hamiltonian, counter-rotating parts included, is kept exactly; the frame
// change only removes the trivial free phase. States are stored in that frame.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "snail/circuit.hpp"
#include "snail/quantum.hpp"

namespace snail {

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& msg, double t)
        : std::runtime_error(msg), time(t) {}
    double time;
};

/// Raised-cosine ramps of length `rise` around a flat top of length `hold`.
struct PulseEnvelope {
    double rise = 5e-9;  // s
    double hold = 0.0;   // s

    double duration() const { return 2.0 * rise + hold; }
    double value(double t) const;
    /// T = integral of f = hold + rise.
    double effective_gate_time() const { return hold + rise; }
    void validate() const;

    /// Envelope of total length `total` with the given ramp (hold = total - 2 rise).
    static PulseEnvelope with_duration(double total, double rise);
};

enum class DriveLine { Flux, Charge };

struct DriveSpec {
    DriveLine line = DriveLine::Flux;
    int harmonic = 1;        // carrier omega_d = harmonic * omega0
    double amplitude = 0.0;  // Phi0 (flux) or rad/s (charge)
    double phase = 0.0;      // rad
    double delay = 0.0;      // s; shifts envelope and carrier
    PulseEnvelope envelope;

    void validate() const;
    double end_time() const { return delay + envelope.duration(); }
};

struct NoiseModel {
    double t1 = 28e-6;               // s; infinity disables relaxation
    double t_phi = 2.9473684210526e-6;  // s; infinity disables dephasing
    double n_th = 0.024;

    /// 1/T_phi = 1/T2* - 1/(2 T1).
    static NoiseModel from_t2_star(double t1, double t2_star, double n_th);
    void validate() const;
    bool has_dissipation() const;
};

/// Relaxation, dephasing and thermal parameters of the measured device.
NoiseModel device_noise();

struct IntegratorOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    /// Largest allowed step in s; <= 0 selects default_max_step(omega0).
    double max_step = 0.0;
    double min_step = 1e-18;
    int max_steps = 50'000'000;
};

/// Step cap used when IntegratorOptions::max_step <= 0: fifty steps per
/// period of the third-harmonic carrier, 2 pi / (50 * 3 omega0).
double default_max_step(double omega0);

struct SimulationConfig {
    TaylorCoefficients coeffs;
    std::vector<DriveSpec> drives;
    std::optional<NoiseModel> noise;
    int dim = 40;
    std::vector<double> t_grid;   // output sample times, s, non-decreasing, >= 0
    StateParams initial;          // any family, thermal included
    IntegratorOptions integrator;

    void validate() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::vector<cdouble> mean_a;
    std::vector<double> mean_n;
    std::vector<double> purity;
    long steps = 0;
    long rhs_evaluations = 0;
};

/// Lab-frame Hamiltonian H(t) (rad/s) on cfg.dim levels.
CMatrix hamiltonian_at(double t, const SimulationConfig& cfg);

/// Integrate from t = 0 through cfg.t_grid.
Trajectory evolve(const SimulationConfig& cfg);

/// Evolve a pure state without dissipation. The returned kets are in the
/// omega0 frame at each time of t_grid.
std::vector<CVector> evolve_ket(const SimulationConfig& cfg, const CVector& psi0);

/// Drop orders above `order` from both the static and the flux-modulated coefficients.
TaylorCoefficients truncate_order(const TaylorCoefficients& c, int order);

}  // namespace snail
