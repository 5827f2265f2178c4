#pragma once

// Run configuration: one YAML file drives any subcommand. Every physical key
// carries its unit as a suffix (_ghz, _mhz, _ohm, _ns, _us, _phi0, _v, _rad).
// Unknown keys are rejected and every block is validated before a run starts.

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "snail/circuit.hpp"
#include "snail/dynamics.hpp"
#include "snail/fitting.hpp"
#include "snail/protocols.hpp"

namespace snail {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimulationSettings {
    std::optional<double> phi_e;  // Phi0; unset means the Kerr-free point of the circuit
    int dim = 60;
    int n_max = 6;
    double rise = 5e-9;
    IntegratorOptions integrator;
    WignerGrid grid;
    StateFitOptions fit;
    int threads = 1;
};

struct FitSection {
    std::string data_csv;
    double default_sigma_mhz = 1.0;
};

struct SweepSection {
    double start = 0.30;  // Phi0
    double stop = 0.45;
    int points = 151;
};

struct KerrFreeSection {
    double lo = 0.30;     // bracket, Phi0
    double hi = 0.45;
    SweepSection sweep;
};

struct SimulateSection {
    double duration = 100e-9;
    double sample = 1e-9;
    std::vector<DriveSpec> drives;
    StateParams initial;
    std::vector<double> wigner_times;  // s
};

struct OutAndBackSection {
    std::vector<double> a_mags{0.5, 1.0, 1.5};
    std::vector<double> phi_list;      // empty: 0.41 and the Kerr-free point
    OutAndBackOptions options;
};

struct SqueezeCalSection {
    GateFamily kind = GateFamily::Squeezing;
    std::vector<double> amplitudes{0.0, 0.002, 0.004, 0.008};
    SqueezeCalOptions options;
    std::optional<cdouble> target;     // run one pulse extrapolated to this parameter
};

struct CubicSection {
    double gamma = 0.11;
    cdouble zeta{-0.61, 0.0};
    CubicOptions options;
};

struct DelayCalSection {
    DelayCalOptions options;
    std::optional<double> phi_e;       // bias for the calibration; unset uses the simulation flux
};

struct BudgetSection {
    std::vector<std::string> removals{"none", "dephasing", "thermal", "t1", "g5_g6",
                                      "thermal+dephasing", "all"};
};

struct RunConfig {
    CircuitParams circuit;
    FluxCalibration flux;
    std::optional<NoiseModel> noise;
    SimulationSettings simulation;
    FitSection fit;
    KerrFreeSection kerr_free;
    SweepSection coeffs;
    SimulateSection simulate;
    OutAndBackSection out_and_back;
    SqueezeCalSection squeeze_cal;
    CubicSection cubic;
    DelayCalSection delay_cal;
    BudgetSection budget;

    /// Every block's invariants; throws ConfigError naming the violated one.
    void validate() const;
};

/// Parse YAML text. `source` names the origin in diagnostics.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Fully resolved configuration as YAML; parse_config(emit_config(c)) == c.
/// Doubles are written with round-trip precision.
std::string emit_config(const RunConfig& cfg, const std::string& subcommand = "");

/// Protocol base for the configured circuit, noise and numerics; the flux bias
/// is resolved (Kerr-free point when unset).
ProtocolBase make_protocol_base(const RunConfig& cfg);
double resolved_flux(const RunConfig& cfg);

}  // namespace snail
