#include "snail/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "snail/csv.hpp"
#include "snail/levmar.hpp"
#include "snail/numerics.hpp"

namespace snail {

void FrequencyDataset::validate() const {
    if (rows.size() < 6) throw std::invalid_argument("FrequencyDataset: needs >= 6 rows");
    for (const auto& r : rows)
        if (!(r.sigma > 0.0)) throw std::invalid_argument("FrequencyDataset: sigma > 0");
}

FrequencyDataset read_frequency_csv(const std::string& path, double default_sigma_mhz) {
    const auto t = read_csv(path);
    const auto v = t.column("voltage_v");
    const auto f = t.column("freq_ghz");
    const bool has_sigma = t.find("sigma_mhz") >= 0;
    const auto s = has_sigma ? t.column("sigma_mhz") : std::vector<double>(v.size(), default_sigma_mhz);
    FrequencyDataset d;
    for (std::size_t k = 0; k < v.size(); ++k)
        d.rows.push_back({v[k], kTwoPi * f[k] * 1e9, kTwoPi * s[k] * 1e6});
    return d;
}

void FluxCalibration::validate() const {
    if (v0 == 0.0 || !std::isfinite(v0)) throw std::invalid_argument("FluxCalibration: v0 != 0");
    if (!std::isfinite(offset)) throw std::invalid_argument("FluxCalibration: offset finite");
}

double flux_from_voltage(double v, const FluxCalibration& cal) { return v / cal.v0 + cal.offset; }

std::vector<double> model_frequencies(const FrequencyDataset& data, const CircuitParams& p,
                                      const FluxCalibration& cal) {
    std::vector<double> w;
    w.reserve(data.rows.size());
    for (const auto& r : data.rows) w.push_back(resonator_frequency(flux_from_voltage(r.voltage, cal), p).omega0);
    return w;
}

namespace {

// Fit coordinates: beta, omega_inf / 2pi [GHz], Z [ohm], v0 [V], offset [Phi0].
Eigen::VectorXd to_vector(const CircuitParams& p, const FluxCalibration& c) {
    Eigen::VectorXd x(5);
    x << p.beta, p.omega_inf / kTwoPi / 1e9, p.impedance, c.v0, c.offset;
    return x;
}

void from_vector(const Eigen::VectorXd& x, CircuitParams& p, FluxCalibration& c) {
    p.beta = x(0);
    p.omega_inf = kTwoPi * x(1) * 1e9;
    p.impedance = x(2);
    c.v0 = x(3);
    c.offset = x(4);
}

}  // namespace

CircuitFit fit_circuit_params(const FrequencyDataset& data, const CircuitParams& guess,
                              const FluxCalibration& cal_guess) {
    data.validate();
    guess.validate();
    cal_guess.validate();

    CircuitParams p = guess;
    FluxCalibration c = cal_guess;
    auto residuals = [&](const Eigen::VectorXd& x) {
        CircuitParams pp = guess;
        FluxCalibration cc;
        from_vector(x, pp, cc);
        Eigen::VectorXd r(data.rows.size());
        for (std::size_t k = 0; k < data.rows.size(); ++k) {
            const auto& row = data.rows[k];
            r(k) = (resonator_frequency(flux_from_voltage(row.voltage, cc), pp).omega0 - row.omega0) / row.sigma;
        }
        return r;
    };
    auto feasible = [&](const Eigen::VectorXd& x) {
        return x(0) > 0.0 && x(0) < 1.0 / guess.n_junctions && x(1) > 0.0 && x(2) > 0.0 && x(3) != 0.0;
    };

    LevMarResult lm;
    try {
        lm = levenberg_marquardt(residuals, to_vector(p, c), {}, feasible);
    } catch (const SolverError& e) {
        throw FitError(std::string("fit_circuit_params: ") + e.what());
    }
    from_vector(lm.x, p, c);

    CircuitFit out{p, c, {}};
    auto& rep = out.report;
    rep.chi2 = lm.cost;
    rep.cost_history = lm.history;
    rep.iterations = lm.iterations;
    rep.message = lm.message;
    rep.names = {"beta", "omega_inf_ghz", "impedance_ohm", "v0_v", "offset_phi0"};
    rep.values.assign(lm.x.data(), lm.x.data() + lm.x.size());

    double ss = 0.0;
    const auto w = model_frequencies(data, p, c);
    for (std::size_t k = 0; k < w.size(); ++k) ss += std::pow(w[k] - data.rows[k].omega0, 2);
    rep.rms_residual = std::sqrt(ss / w.size());

    const Eigen::MatrixXd jtj = lm.jacobian.transpose() * lm.jacobian;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (!lu.isInvertible()) {
        std::ostringstream msg;
        msg << "fit_circuit_params: singular Jacobian at beta=" << p.beta << ", omega_inf/2pi="
            << p.omega_inf / kTwoPi << ", Z=" << p.impedance << ", v0=" << c.v0 << ", offset=" << c.offset;
        throw FitError(msg.str());
    }
    rep.covariance = lu.inverse();
    // Scale by the reduced chi^2 so errors reflect the observed scatter.
    const double dof = std::max<double>(1.0, double(data.rows.size()) - 5.0);
    const double red = lm.cost / dof;
    for (int k = 0; k < 5; ++k) rep.std_errors.push_back(std::sqrt(std::max(0.0, rep.covariance(k, k) * red)));
    if (!lm.converged) throw FitError("fit_circuit_params: " + lm.message);
    return out;
}

void DephasingParams::validate() const {
    if (a_oneoverf < 0.0) throw std::invalid_argument("DephasingParams: a_oneoverf >= 0");
    if (s_bb < 0.0) throw std::invalid_argument("DephasingParams: s_bb >= 0");
    if (!(t1 > 0.0)) throw std::invalid_argument("DephasingParams: t1 > 0");
}

double dephasing_rate(double slope, const DephasingParams& d) {
    const double s = std::abs(slope);
    return 1.0 / (2.0 * d.t1) + kTwoPi * std::sqrt(2.0 * std::log(2.0) * d.a_oneoverf) * s +
           kTwoPi * d.s_bb * s * s;
}

double predict_T2(double phi_e, const DephasingParams& d, const SlopeFn& slope) {
    return 1.0 / dephasing_rate(slope(phi_e), d);
}

DephasingParams fit_dephasing(const std::vector<T2Point>& data, double t1, const SlopeFn& slope) {
    if (!(t1 > 0.0)) throw std::invalid_argument("fit_dephasing: t1 > 0");
    if (data.size() < 2) throw FitError("fit_dephasing: needs at least two points");
    const std::size_t m = data.size();
    // y = 1/T2 - 1/(2T1) = u * (2 pi sqrt(2 ln 2) |s|) + S * (2 pi s^2), u = sqrt(A)
    Eigen::MatrixXd a(m, 2);
    Eigen::VectorXd y(m);
    double max_slope = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double s = std::abs(slope(data[k].phi_e));
        max_slope = std::max(max_slope, s);
        const double w = data[k].t2;  // relative weighting of the rate
        a(k, 0) = w * kTwoPi * std::sqrt(2.0 * std::log(2.0)) * s;
        a(k, 1) = w * kTwoPi * s * s;
        y(k) = w * (1.0 / data[k].t2 - 1.0 / (2.0 * t1));
    }
    if (max_slope == 0.0) throw FitError("fit_dephasing: all slopes vanish; design matrix is degenerate");

    // Two-variable NNLS: the optimum is the unconstrained solution if feasible,
    // otherwise the best of the one-variable faces and the origin.
    struct Cand { double u, s, cost; };
    std::vector<Cand> cands;
    auto cost = [&](double u, double s) { return (a.col(0) * u + a.col(1) * s - y).squaredNorm(); };
    const Eigen::Vector2d full = a.colPivHouseholderQr().solve(y);
    if (full(0) >= 0.0 && full(1) >= 0.0) cands.push_back({full(0), full(1), cost(full(0), full(1))});
    for (int k = 0; k < 2; ++k) {
        const double den = a.col(k).squaredNorm();
        const double v = den > 0.0 ? std::max(0.0, a.col(k).dot(y) / den) : 0.0;
        const double u = k == 0 ? v : 0.0, s = k == 1 ? v : 0.0;
        cands.push_back({u, s, cost(u, s)});
    }
    const auto best = *std::min_element(cands.begin(), cands.end(),
                                        [](const Cand& l, const Cand& r) { return l.cost < r.cost; });
    return {best.u * best.u, best.s, t1};
}

SlopeFn circuit_slope(const CircuitParams& p) {
    return [p](double phi_e) { return frequency_slope(phi_e, p); };
}

}  // namespace snail
