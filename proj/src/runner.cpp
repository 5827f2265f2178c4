#include "snail/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "snail/csv.hpp"
#include "snail/dynamics.hpp"
#include "snail/effective.hpp"
#include "snail/fitting.hpp"
#include "snail/protocols.hpp"

namespace snail {

namespace fs = std::filesystem;

namespace {

constexpr double kMHz = kTwoPi * 1e6;
constexpr double kGHz = kTwoPi * 1e9;

std::string fmt(double v) { return format_double(v); }

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    return f;
}

// Rows mixing a text column with numbers; the numeric-only writer cannot hold those.
void write_text_csv(const fs::path& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
    auto f = open_out(path);
    for (std::size_t k = 0; k < header.size(); ++k) f << (k ? "," : "") << header[k];
    f << "\n";
    for (const auto& r : rows) {
        for (std::size_t k = 0; k < r.size(); ++k) f << (k ? "," : "") << r[k];
        f << "\n";
    }
}

std::string time_tag(double t) { return fmt(std::round(t * 1e9 * 1e6) / 1e6) + "ns"; }

class Outputs {
public:
    Outputs(fs::path dir, std::ostream& log) : dir_(std::move(dir)), log_(log) {}

    fs::path path(const std::string& name) {
        files_.push_back(dir_ / name);
        return files_.back();
    }
    void table(const std::string& name, const CsvTable& t) { write_csv(path(name).string(), t); }
    std::ostream& log() { return log_; }
    std::vector<fs::path> files() const { return files_; }

private:
    fs::path dir_;
    std::ostream& log_;
    std::vector<fs::path> files_;
};

StateFitOptions fit_options(const RunConfig& cfg) {
    StateFitOptions f = cfg.simulation.fit;
    f.dim = cfg.simulation.dim;
    return f;
}

std::vector<std::string> drive_row(const DriveSpec& d) {
    const bool flux = d.line == DriveLine::Flux;
    return {flux ? "flux" : "charge", std::to_string(d.harmonic),
            fmt(flux ? d.amplitude : d.amplitude / kMHz), flux ? "phi0" : "mhz", fmt(d.phase),
            fmt(d.delay * 1e9), fmt(d.envelope.rise * 1e9), fmt(d.envelope.hold * 1e9)};
}

const std::vector<std::string> kDriveHeader{"line", "harmonic", "amplitude", "unit", "phase_rad",
                                            "delay_ns", "rise_ns", "hold_ns"};

// ----------------------------------------------------------------- subcommands

void run_fit(const RunConfig& cfg, Outputs& out) {
    if (cfg.fit.data_csv.empty()) throw ConfigError("protocol.fit: data_csv is required for fit");
    const auto data = read_frequency_csv(cfg.fit.data_csv, cfg.fit.default_sigma_mhz);
    const auto fit = fit_circuit_params(data, cfg.circuit, cfg.flux);

    RunConfig fitted = cfg;
    fitted.circuit = fit.params;
    fitted.flux = fit.calibration;
    {
        auto f = open_out(out.path("fitted.yaml"));
        f << emit_config(fitted);
    }

    std::vector<std::vector<std::string>> rows;
    const auto& r = fit.report;
    for (std::size_t k = 0; k < r.names.size(); ++k)
        rows.push_back({r.names[k], fmt(r.values[k]), fmt(r.std_errors[k])});
    rows.push_back({"z_over_ej_ohm_per_ghz", fmt(fit.z_over_ej()), ""});
    rows.push_back({"chi2", fmt(r.chi2), ""});
    rows.push_back({"rms_residual_mhz", fmt(r.rms_residual / kMHz), ""});
    rows.push_back({"iterations", std::to_string(r.iterations), ""});
    write_text_csv(out.path("fit_report.csv"), {"name", "value", "std_error"}, rows);

    CsvTable res;
    res.header = {"voltage_v", "phi_e", "freq_ghz", "model_ghz", "residual_mhz", "sigma_mhz"};
    const auto model = model_frequencies(data, fit.params, fit.calibration);
    for (std::size_t k = 0; k < data.rows.size(); ++k) {
        const auto& p = data.rows[k];
        res.rows.push_back({p.voltage, flux_from_voltage(p.voltage, fit.calibration), p.omega0 / kGHz,
                            model[k] / kGHz, (p.omega0 - model[k]) / kMHz, p.sigma / kMHz});
    }
    out.table("fit_residuals.csv", res);
    out.log() << "fit: beta = " << fit.params.beta << ", Z/E_J = " << fit.z_over_ej()
              << " ohm/GHz, rms residual " << r.rms_residual / kMHz << " MHz (" << r.message << ")\n";
}

std::vector<double> sweep_points(const SweepSection& s) {
    std::vector<double> x(s.points);
    for (int k = 0; k < s.points; ++k) x[k] = s.start + (s.stop - s.start) * k / (s.points - 1);
    return x;
}

void run_coeffs(const RunConfig& cfg, Outputs& out) {
    const int n = cfg.simulation.n_max;
    CsvTable t;
    t.header = {"phi_e", "omega0_GHz"};
    for (int k = 3; k <= n; ++k) t.header.push_back("g" + std::to_string(k) + "dc_MHz");
    for (int k = 1; k <= n; ++k) t.header.push_back("g" + std::to_string(k) + "ac_MHz");
    for (const char* h : {"K1_MHz", "phi_m_rad", "participation"}) t.header.push_back(h);
    for (double phi : sweep_points(cfg.coeffs)) {
        const auto c = hamiltonian_coefficients(phi, cfg.circuit, n);
        std::vector<double> row{phi, c.omega0 / kGHz};
        for (int k = 3; k <= n; ++k) row.push_back(c.g_dc[k] / kMHz);
        for (int k = 1; k <= n; ++k) row.push_back(c.g_ac[k] / kMHz);
        row.push_back(effective_static(c).k1 / kMHz);
        row.push_back(c.phi_m);
        row.push_back(c.participation);
        t.rows.push_back(std::move(row));
    }
    out.table("coeffs.csv", t);
    out.log() << "coeffs: " << t.rows.size() << " flux points\n";
}

void run_kerr_free(const RunConfig& cfg, Outputs& out) {
    const int n = cfg.simulation.n_max;
    const double phi = find_kerr_free_flux(cfg.circuit, cfg.kerr_free.lo, cfg.kerr_free.hi, n);
    const auto c = hamiltonian_coefficients(phi, cfg.circuit, n);
    CsvTable root;
    root.header = {"phi_e", "omega0_GHz", "K1_MHz", "g1ac_MHz", "g3ac_MHz", "g3dc_MHz", "g1ac_over_g3ac"};
    root.rows.push_back({phi, c.omega0 / kGHz, effective_static(c).k1 / kMHz, c.g_ac[1] / kMHz,
                         c.g_ac[3] / kMHz, c.g_dc[3] / kMHz, c.g_ac[1] / c.g_ac[3]});
    out.table("kerr_free.csv", root);

    CsvTable sweep;
    sweep.header = {"phi_e", "K1_MHz"};
    for (double p : sweep_points(cfg.kerr_free.sweep)) sweep.rows.push_back({p, kerr_at(p, cfg.circuit, n) / kMHz});
    out.table("kerr_sweep.csv", sweep);
    out.log() << "kerr-free: phi_e* = " << phi << " Phi0, omega0/2pi = " << c.omega0 / kGHz << " GHz\n";
}

void run_simulate(const RunConfig& cfg, Outputs& out) {
    const auto base = make_protocol_base(cfg);
    const auto& s = cfg.simulate;
    SimulationConfig sim;
    sim.coeffs = base.coefficients();
    sim.drives = s.drives;
    sim.noise = cfg.noise;
    sim.dim = cfg.simulation.dim;
    sim.initial = s.initial;
    sim.integrator = cfg.simulation.integrator;

    const int n = static_cast<int>(std::floor(s.duration / s.sample + 1e-9));
    std::vector<double> grid;
    for (int k = 0; k <= n; ++k) grid.push_back(k * s.sample);
    if (grid.back() < s.duration * (1.0 - 1e-12)) grid.push_back(s.duration);
    const std::size_t n_traj = grid.size();
    for (double t : s.wigner_times) grid.push_back(t);
    std::vector<std::size_t> order(grid.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return grid[a] < grid[b]; });
    sim.t_grid.clear();
    for (auto k : order) sim.t_grid.push_back(grid[k]);
    std::vector<std::size_t> slot(grid.size());
    for (std::size_t k = 0; k < order.size(); ++k) slot[order[k]] = k;

    const auto traj = evolve(sim);

    CsvTable t;
    t.header = {"t_ns", "re_a", "im_a", "n", "purity"};
    for (std::size_t k = 0; k < n_traj; ++k) {
        const auto j = slot[k];
        t.rows.push_back({grid[k] * 1e9, traj.mean_a[j].real(), traj.mean_a[j].imag(), traj.mean_n[j],
                          traj.purity[j]});
    }
    out.table("trajectory.csv", t);
    for (std::size_t w = 0; w < s.wigner_times.size(); ++w) {
        const auto& rho = traj.states[slot[n_traj + w]];
        write_wigner_csv(out.path("wigner_" + time_tag(s.wigner_times[w]) + ".csv"), wigner(rho, cfg.simulation.grid));
    }
    const auto& last = traj.states[slot[n_traj - 1]];
    const auto re = out.path("state_final_re.csv");
    write_state_csv(re, out.path("state_final_im.csv"), last);
    out.log() << "simulate: phi_e = " << base.phi_e << ", final <n> = "
              << last.mean_n() << "\n";
}

void run_out_and_back(const RunConfig& cfg, Outputs& out) {
    const auto base = make_protocol_base(cfg);
    auto phis = cfg.out_and_back.phi_list;
    if (phis.empty()) phis = {0.41, base.phi_e};
    const auto pts = protocol_out_and_back(base, cfg.out_and_back.a_mags, phis, cfg.out_and_back.options);
    CsvTable t;
    t.header = {"phi_e", "a_mag", "theta_rad", "theta_model_rad", "overlap", "charge_amplitude_MHz", "distorted"};
    for (const auto& p : pts)
        t.rows.push_back({p.phi_e, p.a_mag, p.theta, p.theta_model, p.overlap, p.charge_amplitude / kMHz,
                          p.distorted ? 1.0 : 0.0});
    out.table("out_and_back.csv", t);
    for (const auto& p : pts)
        out.log() << "out-and-back: phi_e " << p.phi_e << " |a| " << p.a_mag << " theta " << p.theta
                  << " (model " << p.theta_model << ")\n";
}

void run_squeeze_cal(const RunConfig& cfg, Outputs& out) {
    const auto base = make_protocol_base(cfg);
    const auto& q = cfg.squeeze_cal;
    auto opts = q.options;
    opts.fit = fit_options(cfg);
    const auto res = protocol_generalized_squeezing(base, q.kind, q.amplitudes, opts);

    CsvTable t;
    t.header = {"amplitude_phi0", "gate_time_ns", "param_re", "param_im", "overlap", "min_wigner"};
    for (const auto& p : res.points)
        t.rows.push_back({p.amplitude, p.gate_time * 1e9, p.param.real(), p.param.imag(), p.overlap, p.min_wigner});
    out.table("squeeze_cal.csv", t);

    CsvTable r;
    r.header = {"harmonic", "rate_re_MHz", "rate_im_MHz", "rate_abs_MHz", "formula_rate_MHz", "linear_points"};
    r.rows.push_back({double(harmonic_of(q.kind)), res.rate.real() / kMHz, res.rate.imag() / kMHz,
                      std::abs(res.rate) / kMHz, res.formula_rate / kMHz, double(res.linear_points)});
    out.table("squeeze_rate.csv", r);
    out.log() << "squeeze-cal (" << to_string(q.kind) << "): |rate| = " << std::abs(res.rate) / kMHz
              << " MHz/Phi0, formula " << res.formula_rate / kMHz << "\n";

    if (q.target) {
        const auto drive = drive_for_target(q.kind, res.rate, *q.target, opts.duration, base.rise);
        DensityMatrix rho;
        const auto p = run_gate_pulse(base, q.kind, drive, opts.fit, &rho);
        const double db = q.kind == GateFamily::Squeezing ? squeezing_to_db(std::abs(p.param)) : 0.0;
        CsvTable tp;
        tp.header = {"target_re", "target_im", "amplitude_phi0", "phase_rad", "param_re", "param_im",
                     "param_abs", "squeezing_db", "overlap", "min_wigner"};
        tp.rows.push_back({q.target->real(), q.target->imag(), drive.amplitude, drive.phase, p.param.real(),
                           p.param.imag(), std::abs(p.param), db, p.overlap, p.min_wigner});
        out.table("target_pulse.csv", tp);
        write_wigner_csv(out.path("wigner_target.csv"), wigner(rho, cfg.simulation.grid));
        out.log() << "target pulse: fitted " << p.param.real() << (p.param.imag() < 0 ? " - " : " + ")
                  << std::abs(p.param.imag()) << "i, min W " << p.min_wigner << "\n";
    }
}

void run_cubic(const RunConfig& cfg, Outputs& out) {
    const auto base = make_protocol_base(cfg);
    auto opts = cfg.cubic.options;
    opts.fit = fit_options(cfg);
    const auto res = protocol_cubic_state(base, cfg.cubic.gamma, cfg.cubic.zeta, opts);

    const auto& f = res.fit.params;
    const auto& c = res.closest.params;
    CsvTable t;
    t.header = {"fit_gamma", "fit_zeta_re", "fit_zeta_im", "fit_alpha_re", "fit_alpha_im", "fit_overlap",
                "fidelity", "closest_gamma", "closest_zeta_re", "closest_zeta_im", "mid_gate_re_a",
                "mid_gate_im_a", "mid_gate_residual", "min_wigner"};
    const auto w = wigner(res.state, cfg.simulation.grid);
    t.rows.push_back({f.gamma, f.zeta.real(), f.zeta.imag(), f.alpha.real(), f.alpha.imag(), res.fit.overlap,
                      res.closest.fidelity, c.gamma, c.zeta.real(), c.zeta.imag(), res.mid_gate_mean_a.real(),
                      res.mid_gate_mean_a.imag(), res.mid_gate_residual, w.min()});
    out.table("cubic.csv", t);

    std::vector<std::vector<std::string>> rows;
    for (const auto& d : res.calibration.drives()) rows.push_back(drive_row(d));
    write_text_csv(out.path("cubic_drives.csv"), kDriveHeader, rows);
    write_wigner_csv(out.path("wigner_cubic.csv"), w);
    const auto re = out.path("state_cubic_re.csv");
    write_state_csv(re, out.path("state_cubic_im.csv"), res.state);
    out.log() << "cubic: fit gamma " << f.gamma << ", zeta " << f.zeta.real() << ", fidelity "
              << res.closest.fidelity << "\n";
}

void run_delay_cal(const RunConfig& cfg, Outputs& out) {
    auto base = make_protocol_base(cfg);
    if (cfg.delay_cal.phi_e) base.phi_e = *cfg.delay_cal.phi_e;
    const auto res = calibrate_delay(base, cfg.delay_cal.options);
    CsvTable t;
    t.header = {"delay_ns", "cost"};
    for (std::size_t k = 0; k < res.delays.size(); ++k) t.rows.push_back({res.delays[k] * 1e9, res.costs[k]});
    out.table("delay_scan.csv", t);
    CsvTable r;
    r.header = {"phi_e", "injected_ns", "optimum_ns", "cost_at_optimum"};
    r.rows.push_back({base.phi_e, cfg.delay_cal.options.injected * 1e9, res.optimum * 1e9, res.cost_at_optimum});
    out.table("delay_result.csv", r);
    out.log() << "delay-cal: optimum " << res.optimum * 1e9 << " ns\n";
}

void run_budget(const RunConfig& cfg, Outputs& out) {
    if (!cfg.noise) throw ConfigError("budget: a noise block is required");
    const auto base = make_protocol_base(cfg);
    auto opts = cfg.cubic.options;
    opts.fit = fit_options(cfg);
    const auto rows = error_budget(base, cfg.cubic.gamma, cfg.cubic.zeta, cfg.budget.removals, opts);
    double reference = std::nan("");
    for (const auto& r : rows)
        if (r.removed == "none") reference = r.infidelity;
    std::vector<std::vector<std::string>> text;
    for (const auto& r : rows) {
        const auto& p = r.closest.params;
        text.push_back({r.removed, fmt(r.infidelity), fmt(reference - r.infidelity), fmt(r.closest.fidelity),
                        fmt(p.gamma), fmt(p.zeta.real()), fmt(p.zeta.imag())});
        out.log() << "budget: " << r.removed << " infidelity " << r.infidelity << "\n";
    }
    write_text_csv(out.path("budget.csv"),
                   {"removed", "infidelity", "reduction", "fidelity", "gamma", "zeta_re", "zeta_im"}, text);
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s{"fit", "coeffs", "kerr-free", "simulate", "out-and-back",
                                            "squeeze-cal", "cubic", "delay-cal", "budget"};
    return s;
}

std::vector<fs::path> run(const std::string& subcommand, const RunConfig& cfg, const fs::path& out_dir,
                          std::ostream& log) {
    cfg.validate();
    fs::create_directories(out_dir);
    Outputs out(out_dir, log);
    if (subcommand == "fit") {
        run_fit(cfg, out);
    } else if (subcommand == "coeffs") {
        run_coeffs(cfg, out);
    } else if (subcommand == "kerr-free") {
        run_kerr_free(cfg, out);
    } else if (subcommand == "simulate") {
        run_simulate(cfg, out);
    } else if (subcommand == "out-and-back") {
        run_out_and_back(cfg, out);
    } else if (subcommand == "squeeze-cal") {
        run_squeeze_cal(cfg, out);
    } else if (subcommand == "cubic") {
        run_cubic(cfg, out);
    } else if (subcommand == "delay-cal") {
        run_delay_cal(cfg, out);
    } else if (subcommand == "budget") {
        run_budget(cfg, out);
    } else {
        throw ConfigError("unknown subcommand '" + subcommand + "'");
    }
    {
        auto f = open_out(out.path("manifest.yaml"));
        f << emit_config(cfg, subcommand);
    }
    return out.files();
}

void write_wigner_csv(const fs::path& path, const WignerMap& map) {
    auto f = open_out(path);
    f << "im\\re";
    for (double x : map.re_axis) f << "," << fmt(x);
    f << "\n";
    for (std::size_t i = 0; i < map.im_axis.size(); ++i) {
        f << fmt(map.im_axis[i]);
        for (std::size_t j = 0; j < map.re_axis.size(); ++j) f << "," << fmt(map.values(i, j));
        f << "\n";
    }
}

void write_state_csv(const fs::path& re_path, const fs::path& im_path, const DensityMatrix& rho) {
    auto re = open_out(re_path);
    auto im = open_out(im_path);
    const int n = rho.dim();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            re << (j ? "," : "") << fmt(rho.data(i, j).real());
            im << (j ? "," : "") << fmt(rho.data(i, j).imag());
        }
        re << "\n";
        im << "\n";
    }
}

DensityMatrix read_state_csv(const fs::path& re_path, const fs::path& im_path) {
    auto load = [](const fs::path& p) {
        std::ifstream f(p);
        if (!f) throw std::runtime_error("cannot open '" + p.string() + "'");
        std::vector<std::vector<double>> rows;
        std::string line;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            std::vector<double> r;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
            rows.push_back(std::move(r));
        }
        return rows;
    };
    const auto re = load(re_path), im = load(im_path);
    const int n = static_cast<int>(re.size());
    if (static_cast<int>(im.size()) != n) throw std::runtime_error("state CSVs differ in size");
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(re[i].size()) != n || static_cast<int>(im[i].size()) != n)
            throw std::runtime_error("state CSV is not square");
        for (int j = 0; j < n; ++j) m(i, j) = {re[i][j], im[i][j]};
    }
    return DensityMatrix(m);
}

}  // namespace snail
