#pragma once

// Calibration and gate protocols built on the master-equation solver:
// out-and-back drift, generalized-squeezing calibration, the cubic-phase-state
// sequence, flux/charge delay calibration and the error budget.
//
// Drive-phase convention: a gate parameter produced by a drive with phase phi
// scales as exp(-i phi). Each protocol measures the parameter at phase 0 with a
// short probe and then chooses phi so that the requested (signed, complex)
// target is produced. Phase 0 of the public targets therefore means zeta, tau
// real and negative when the target is given as a negative real number.

#include <optional>
#include <string>
#include <vector>

#include "snail/circuit.hpp"
#include "snail/dynamics.hpp"
#include "snail/quantum.hpp"

namespace snail {

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProtocolBase {
    CircuitParams circuit;
    double phi_e = 0.0;                // static flux bias, Phi0
    std::optional<NoiseModel> noise;   // absent: closed-system evolution
    int dim = 60;
    int n_max = 6;
    double rise = 5e-9;                // raised-cosine ramp of every pulse, s
    IntegratorOptions integrator;
    WignerGrid grid;
    int threads = 1;

    TaylorCoefficients coefficients() const;
    /// Initial state: thermal with the noise model's occupation, otherwise vacuum.
    StateParams initial_state() const;
};

// ---------------------------------------------------------------- out-and-back

struct OutAndBackOptions {
    double pulse = 10e-9;   // displacement pulse length, s
    double wait = 100e-9;   // free evolution, s
    int scan_angles = 64;
};

struct OutAndBackPoint {
    double phi_e = 0.0;
    double a_mag = 0.0;
    double theta = 0.0;          // measured drift angle, rad
    double theta_model = 0.0;    // -(delta_omega + K1 a^2) t from the perturbative coefficients
    double overlap = 0.0;        // vacuum overlap at the optimum return angle
    double charge_amplitude = 0.0;
    bool distorted = false;      // overlap maximum below 0.5
};

/// Vacuum overlap <b|rho|b> after the return displacement D(-b), b = a e^{i psi}.
double return_overlap(const DensityMatrix& rho, double a_mag, double psi);
/// Angle maximizing the return overlap: coarse scan, then golden-section refinement.
std::pair<double, double> best_return_angle(const DensityMatrix& rho, double a_mag, int scan_angles);

std::vector<OutAndBackPoint> protocol_out_and_back(const ProtocolBase& base,
                                                   const std::vector<double>& a_mags,
                                                   const std::vector<double>& phi_list,
                                                   const OutAndBackOptions& opts = {});

// ------------------------------------------------------- generalized squeezing

enum class GateFamily { Displacement, Squeezing, Trisqueezing };

int harmonic_of(GateFamily kind);
std::string to_string(GateFamily kind);
GateFamily gate_family_from_string(const std::string& s);

struct SqueezePoint {
    double amplitude = 0.0;   // Phi0
    double gate_time = 0.0;   // T = integral of f, s
    cdouble param{};          // fitted alpha, zeta or tau
    double overlap = 1.0;     // Wigner overlap of the fit (1 for displacement)
    double min_wigner = 0.0;
};

struct SqueezeCalResult {
    GateFamily kind = GateFamily::Squeezing;
    double duration = 0.0;
    std::vector<SqueezePoint> points;
    cdouble rate{};            // complex slope d(param)/d(phi T) at phase 0 in the linear regime
    double formula_rate = 0.0; // |rate| predicted by the perturbative formula
    int linear_points = 0;     // points used for the slope
};

struct SqueezeCalOptions {
    double duration = 20e-9;
    double linear_limit = 0.0;   // |param| bound of the linear regime; 0 selects a per-family default
    double phase = 0.0;
    StateFitOptions fit;
};

/// Sweep the flux amplitude at harmonic k and fit each output state.
SqueezeCalResult protocol_generalized_squeezing(const ProtocolBase& base, GateFamily kind,
                                                const std::vector<double>& amplitudes,
                                                const SqueezeCalOptions& opts = {});

/// Evolve one pulse from the initial state and fit it with the matching family.
SqueezePoint run_gate_pulse(const ProtocolBase& base, GateFamily kind, const DriveSpec& drive,
                            const StateFitOptions& fit, DensityMatrix* final_state = nullptr);

/// Drive reaching `target` by linear extrapolation of the measured complex rate.
DriveSpec drive_for_target(GateFamily kind, cdouble rate, cdouble target, double duration, double rise);

// ------------------------------------------------------------------ cubic gate

struct CubicCalibration {
    DriveSpec squeeze;    // 2 omega0 flux
    DriveSpec trisqueeze; // 3 omega0 flux
    DriveSpec cross;      // 1 omega0 flux
    DriveSpec charge;     // 1 omega0 charge cancelling the g1ac displacement
    DriveSpec squeeze_trim;  // 1 omega0 charge removing the squeezing pulse's stray displacement
    cdouble squeeze_rate{}, trisqueeze_rate{}, cross_rate{};

    std::vector<DriveSpec> drives() const { return {squeeze, squeeze_trim, trisqueeze, cross, charge}; }
};

struct CubicOptions {
    double squeeze_duration = 20e-9;
    double cubic_duration = 40e-9;
    double max_mid_residual = 0.3;   // allowed |<a> - <a>_ideal| half way through the cubic pulse
    int trim_iterations = 2;         // mean-field tune-up passes on the charge tones (0 disables)
    StateFitOptions fit;
};

/// Closed-system calibration of the four drives for the targets.
CubicCalibration calibrate_cubic(const ProtocolBase& base, double gamma, cdouble zeta,
                                 const CubicOptions& opts = {});

struct CubicResult {
    DensityMatrix state;
    StateFitResult fit;            // Wigner-overlap fit with the cubic family
    CubicFidelityResult closest;   // fidelity to the closest ideal cubic state
    cdouble mid_gate_mean_a{};
    double mid_gate_residual = 0.0;
    CubicCalibration calibration;
};

/// Run the squeeze + cubic sequence with a given calibration.
CubicResult run_cubic_sequence(const ProtocolBase& base, const CubicCalibration& cal, double gamma,
                               cdouble zeta, const CubicOptions& opts = {}, bool fit_wigner = true);

/// Calibrate without noise, then run the sequence with base.noise.
CubicResult protocol_cubic_state(const ProtocolBase& base, double gamma, cdouble zeta,
                                 const CubicOptions& opts = {});

// ----------------------------------------------------------- delay calibration

struct DelayCalOptions {
    double flux_amplitude = 0.0024;  // Phi0
    double pulse = 20e-9;            // s
    double injected = 0.0;           // hardware offset of the charge line, s
    std::vector<double> scan;        // flux-line delays, s; empty selects 0..16 ns in 1 ns steps
    int dim = 60;
    double max_step = 0.0;           // s; 0 selects half the default cap (large excursions)
};

struct DelayCalResult {
    std::vector<double> delays;
    std::vector<double> costs;
    double optimum = 0.0;
    double cost_at_optimum = 0.0;
};

/// Normalized mean squared Wigner-pixel distance to vacuum for a given flux-line delay.
double delay_cost(const ProtocolBase& base, const DelayCalOptions& opts, double flux_delay);

DelayCalResult calibrate_delay(const ProtocolBase& base, const DelayCalOptions& opts);

// --------------------------------------------------------------- error budget

struct BudgetRow {
    std::string removed;   // "none", a channel, "a+b" or "all"
    double infidelity = 0.0;
    CubicFidelityResult closest;
};

/// Channels: dephasing, t1, thermal, g5_g6; "all" removes every noise channel.
std::vector<BudgetRow> error_budget(const ProtocolBase& base, double gamma, cdouble zeta,
                                   const std::vector<std::string>& removals,
                                   const CubicOptions& opts = {},
                                   const CubicCalibration* calibration = nullptr);

/// Apply a removal spec ("none", "dephasing", "t1+thermal", "all", ...) to a base.
ProtocolBase remove_channels(const ProtocolBase& base, const std::string& removal);

}  // namespace snail
