#pragma once

// Circuit-parameter and flux-calibration fit to frequency-vs-voltage data, and
// the 1/f plus broadband flux-noise dephasing model.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "snail/circuit.hpp"

namespace snail {

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FrequencyPoint {
    double voltage = 0.0;  // V
    double omega0 = 0.0;   // rad/s
    double sigma = 0.0;    // rad/s
};

struct FrequencyDataset {
    std::vector<FrequencyPoint> rows;
    void validate() const;  // >= 6 rows, sigma > 0
};

/// Columns voltage_v, freq_ghz and optionally sigma_mhz (default 1 MHz).
FrequencyDataset read_frequency_csv(const std::string& path, double default_sigma_mhz = 1.0);

struct FluxCalibration {
    double v0 = 1.0;      // volts per Phi0
    double offset = 0.0;  // Phi0
    void validate() const;
};

double flux_from_voltage(double v, const FluxCalibration& cal);

struct FitReport {
    double chi2 = 0.0;                  // weighted sum of squares
    double rms_residual = 0.0;          // unweighted, rad/s
    Eigen::MatrixXd covariance;         // (J^T J)^-1 in fit coordinates
    std::vector<std::string> names;     // fit coordinates
    std::vector<double> values;
    std::vector<double> std_errors;
    std::vector<double> cost_history;   // non-increasing
    int iterations = 0;
    std::string message;
};

struct CircuitFit {
    CircuitParams params;
    FluxCalibration calibration;
    FitReport report;
    /// Z / E_J in ohm per GHz, the combination that the data determine.
    double z_over_ej() const { return params.impedance / params.ej_ghz; }
};

/// Weighted least squares over (beta, omega_inf, Z, v0, offset) with E_J held
/// at guess.ej_ghz. Because only Z/E_J enters the frequency, fitting Z at fixed
/// E_J is the same as fitting Z/E_J.
CircuitFit fit_circuit_params(const FrequencyDataset& data, const CircuitParams& guess,
                              const FluxCalibration& cal_guess);

/// Model frequency for every row of the dataset.
std::vector<double> model_frequencies(const FrequencyDataset& data, const CircuitParams& p,
                                      const FluxCalibration& cal);

struct DephasingParams {
    double a_oneoverf = 0.0;  // Phi0^2
    double s_bb = 0.0;        // Phi0^2 / Hz
    double t1 = 0.0;          // s
    void validate() const;
};

struct T2Point {
    double phi_e = 0.0;  // Phi0
    double t2 = 0.0;     // s
};

using SlopeFn = std::function<double(double)>;

/// Dephasing rate 1/T2 = 1/(2 T1) + 2 pi sqrt(2 ln2 A) |s| + 2 pi S_bb s^2 with
/// s = d(omega0)/d(phi_e).
double dephasing_rate(double slope, const DephasingParams& d);
double predict_T2(double phi_e, const DephasingParams& d, const SlopeFn& slope);

/// Non-negative least squares in (sqrt A, S_bb), residuals relative to each 1/T2.
DephasingParams fit_dephasing(const std::vector<T2Point>& data, double t1, const SlopeFn& slope);

/// Slope function backed by the implicit frequency solve.
SlopeFn circuit_slope(const CircuitParams& p);

}  // namespace snail
