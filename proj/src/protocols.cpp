#include "snail/protocols.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "snail/effective.hpp"
#include "snail/numerics.hpp"

namespace snail {

namespace {

double wrap_angle(double x) {
    x = std::fmod(x + kPi, kTwoPi);
    if (x < 0.0) x += kTwoPi;
    return x - kPi;
}

// Run f(0..n-1) on up to `threads` workers; the first exception is rethrown.
template <class F>
void parallel_for(int n, int threads, F&& f) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex m;
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int k = 0; k < std::min(threads, n); ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

SimulationConfig base_config(const ProtocolBase& b, const TaylorCoefficients& c) {
    SimulationConfig cfg;
    cfg.coeffs = c;
    cfg.dim = b.dim;
    cfg.noise = b.noise;
    cfg.initial = b.initial_state();
    cfg.integrator = b.integrator;
    return cfg;
}

CVector coherent_ket(cdouble b, int dim) {
    CVector c(dim);
    c(0) = std::exp(-0.5 * std::norm(b));
    for (int k = 1; k < dim; ++k) c(k) = c(k - 1) * b / std::sqrt(double(k));
    return c;
}

// Linear-regime estimate of a squeezing or trisqueezing parameter from the
// vacuum-to-|2> or vacuum-to-|3> coherence of a state close to vacuum.
cdouble fock_estimate(GateFamily kind, const DensityMatrix& rho) {
    const cdouble r00 = rho.data(0, 0);
    if (std::abs(r00) < 1e-6) return 0.0;
    if (kind == GateFamily::Squeezing) {
        const cdouble x = -std::sqrt(2.0) * rho.data(2, 0) / r00;
        const double m = std::min(std::abs(x), 0.99);
        return m == 0.0 ? cdouble(0.0) : std::polar(std::atanh(m), std::arg(x));
    }
    if (kind == GateFamily::Trisqueezing) return rho.data(3, 0) / (std::sqrt(6.0) * r00);
    return rho.mean_a();
}

FitFamily fit_family(GateFamily kind) {
    return kind == GateFamily::Trisqueezing ? FitFamily::Trisqueezed : FitFamily::Squeezed;
}

// Complex amplitude A e^{-i phase}; gate parameters are linear in it.
cdouble phasor(const DriveSpec& d) { return std::polar(d.amplitude, -d.phase); }

void set_phasor(DriveSpec& d, cdouble z) {
    d.amplitude = std::abs(z);
    d.phase = d.amplitude > 0.0 ? wrap_angle(-std::arg(z)) : 0.0;
}

ProtocolBase noiseless(const ProtocolBase& b) {
    ProtocolBase out = b;
    out.noise.reset();
    return out;
}

}  // namespace

TaylorCoefficients ProtocolBase::coefficients() const {
    return hamiltonian_coefficients(phi_e, circuit, n_max);
}

StateParams ProtocolBase::initial_state() const {
    StateParams s;
    if (noise && noise->n_th > 0.0) {
        s.family = StateFamily::Thermal;
        s.n_th = noise->n_th;
    }
    return s;
}

// ---------------------------------------------------------------- out-and-back

double return_overlap(const DensityMatrix& rho, double a_mag, double psi) {
    return fidelity(rho, coherent_ket(std::polar(a_mag, psi), rho.dim()));
}

std::pair<double, double> best_return_angle(const DensityMatrix& rho, double a_mag, int scan_angles) {
    if (scan_angles < 8) throw std::invalid_argument("best_return_angle: scan_angles >= 8");
    const double step = kTwoPi / scan_angles;
    int best = 0;
    double best_val = -1.0;
    for (int k = 0; k < scan_angles; ++k) {
        const double v = return_overlap(rho, a_mag, -kPi + k * step);
        if (v > best_val) {
            best_val = v;
            best = k;
        }
    }
    const double c = -kPi + best * step;
    const auto m = golden_section_min([&](double psi) { return -return_overlap(rho, a_mag, psi); },
                                      c - step, c + step, 1e-9);
    return {wrap_angle(m.x), -m.value};
}

namespace {

OutAndBackPoint out_and_back_point(const ProtocolBase& base, double phi, double a,
                                   const OutAndBackOptions& opts) {
    ProtocolBase b = base;
    b.phi_e = phi;
    const auto coeffs = b.coefficients();
    auto cfg = base_config(b, coeffs);
    const double n0 = make_state(cfg.initial, cfg.dim).mean_n();

    DriveSpec d;
    d.line = DriveLine::Charge;
    d.harmonic = 1;
    d.envelope = PulseEnvelope::with_duration(opts.pulse, std::min(b.rise, opts.pulse / 2));
    d.amplitude = 2.0 * a / d.envelope.effective_gate_time();
    cfg.t_grid = {opts.pulse};
    // Amplitude from <n> after the pulse, phase from arg<a> (alpha ~ exp(-i phase)).
    for (int it = 0; it < 3 && a > 0.0; ++it) {
        cfg.drives = {d};
        const auto tr = evolve(cfg);
        const double reached = std::sqrt(std::max(tr.mean_n.back() - n0, 1e-12));
        d.amplitude *= a / reached;
        d.phase = wrap_angle(d.phase + std::arg(tr.mean_a.back()));
    }
    cfg.drives = {d};
    if (a == 0.0) cfg.drives.clear();
    cfg.t_grid = {opts.pulse, opts.pulse + opts.wait};
    const auto tr = evolve(cfg);

    OutAndBackPoint p;
    p.phi_e = phi;
    p.a_mag = a;
    p.charge_amplitude = a > 0.0 ? d.amplitude : 0.0;
    if (a == 0.0) {
        p.overlap = tr.states.back().data(0, 0).real();
        p.theta = 0.0;
    } else {
        const auto before = best_return_angle(tr.states[0], a, opts.scan_angles);
        const auto after = best_return_angle(tr.states[1], a, opts.scan_angles);
        p.theta = wrap_angle(after.first - before.first);
        p.overlap = after.second;
    }
    p.distorted = p.overlap < 0.5;
    p.theta_model = drift_angle(a, opts.wait, effective_static(coeffs));
    return p;
}

}  // namespace

std::vector<OutAndBackPoint> protocol_out_and_back(const ProtocolBase& base,
                                                   const std::vector<double>& a_mags,
                                                   const std::vector<double>& phi_list,
                                                   const OutAndBackOptions& opts) {
    for (double a : a_mags)
        if (a < 0.0) throw std::invalid_argument("protocol_out_and_back: a_mag >= 0");
    const int na = static_cast<int>(a_mags.size());
    const int n = na * static_cast<int>(phi_list.size());
    std::vector<OutAndBackPoint> out(n);
    parallel_for(n, base.threads, [&](int i) {
        out[i] = out_and_back_point(base, phi_list[i / na], a_mags[i % na], opts);
    });
    return out;
}

// ------------------------------------------------------- generalized squeezing

int harmonic_of(GateFamily kind) {
    switch (kind) {
        case GateFamily::Displacement: return 1;
        case GateFamily::Squeezing: return 2;
        case GateFamily::Trisqueezing: return 3;
    }
    return 1;
}

std::string to_string(GateFamily kind) {
    switch (kind) {
        case GateFamily::Displacement: return "displacement";
        case GateFamily::Squeezing: return "squeezing";
        case GateFamily::Trisqueezing: return "trisqueezing";
    }
    return "?";
}

GateFamily gate_family_from_string(const std::string& s) {
    if (s == "displacement") return GateFamily::Displacement;
    if (s == "squeezing") return GateFamily::Squeezing;
    if (s == "trisqueezing") return GateFamily::Trisqueezing;
    throw std::invalid_argument("unknown gate kind '" + s + "' (displacement, squeezing, trisqueezing)");
}

SqueezePoint run_gate_pulse(const ProtocolBase& base, GateFamily kind, const DriveSpec& drive,
                            const StateFitOptions& fit, DensityMatrix* final_state) {
    const auto coeffs = base.coefficients();
    auto cfg = base_config(base, coeffs);
    if (drive.amplitude > 0.0) cfg.drives = {drive};
    cfg.t_grid = {drive.end_time()};
    const auto tr = evolve(cfg);
    const auto& rho = tr.states.back();

    SqueezePoint p;
    p.amplitude = drive.amplitude;
    p.gate_time = drive.envelope.effective_gate_time();
    const auto w = wigner(rho, base.grid);
    p.min_wigner = w.min();
    if (kind == GateFamily::Displacement) {
        p.param = rho.mean_a();
    } else {
        StateParams guess;
        const cdouble est = fock_estimate(kind, rho);
        (kind == GateFamily::Squeezing ? guess.zeta : guess.tau) = est;
        StateFitOptions fo = fit;
        fo.dim = rho.dim();
        const auto r = fit_state(w, fit_family(kind), guess, fo);
        p.param = kind == GateFamily::Squeezing ? r.params.zeta : r.params.tau;
        p.overlap = r.overlap;
    }
    if (final_state) *final_state = rho;
    return p;
}

DriveSpec drive_for_target(GateFamily kind, cdouble rate, cdouble target, double duration, double rise) {
    if (std::abs(rate) == 0.0) throw CalibrationError("drive_for_target: zero calibrated rate");
    DriveSpec d;
    d.line = DriveLine::Flux;
    d.harmonic = harmonic_of(kind);
    d.envelope = PulseEnvelope::with_duration(duration, rise);
    d.amplitude = std::abs(target) / (std::abs(rate) * d.envelope.effective_gate_time());
    d.phase = std::abs(target) > 0.0 ? wrap_angle(std::arg(rate) - std::arg(target)) : 0.0;
    return d;
}

SqueezeCalResult protocol_generalized_squeezing(const ProtocolBase& base, GateFamily kind,
                                                const std::vector<double>& amplitudes,
                                                const SqueezeCalOptions& opts) {
    SqueezeCalResult res;
    res.kind = kind;
    res.duration = opts.duration;
    res.points.resize(amplitudes.size());
    parallel_for(static_cast<int>(amplitudes.size()), base.threads, [&](int i) {
        DriveSpec d;
        d.harmonic = harmonic_of(kind);
        d.amplitude = amplitudes[i];
        d.phase = opts.phase;
        d.envelope = PulseEnvelope::with_duration(opts.duration, std::min(base.rise, opts.duration / 2));
        try {
            res.points[i] = run_gate_pulse(base, kind, d, opts.fit);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "generalized squeezing: amplitude index " << i << ": " << e.what();
            throw std::runtime_error(msg.str());
        }
    });

    double limit = opts.linear_limit;
    if (limit <= 0.0) limit = kind == GateFamily::Displacement ? 0.5 : kind == GateFamily::Squeezing ? 0.3 : 0.05;
    cdouble num = 0.0;
    double den = 0.0;
    const SqueezePoint* smallest = nullptr;
    for (const auto& p : res.points) {
        if (p.amplitude <= 0.0) continue;
        if (!smallest || p.amplitude < smallest->amplitude) smallest = &p;
        if (std::abs(p.param) > limit) continue;
        const double x = p.amplitude * p.gate_time;
        num += p.param * x;
        den += x * x;
        ++res.linear_points;
    }
    if (res.linear_points == 0 && smallest) {
        const double x = smallest->amplitude * smallest->gate_time;
        num = smallest->param * x;
        den = x * x;
        res.linear_points = 1;
    }
    res.rate = den > 0.0 ? num / den : cdouble(0.0);

    const auto coeffs = base.coefficients();
    const auto rates = drive_rates(coeffs, harmonic_of(kind) * coeffs.omega0);
    res.formula_rate = std::abs(kind == GateFamily::Displacement ? rates.alpha_rate
                                : kind == GateFamily::Squeezing  ? rates.zeta_rate
                                                                 : rates.tau_rate);
    return res;
}

// ------------------------------------------------------------------ cubic gate

CubicCalibration calibrate_cubic(const ProtocolBase& base_in, double gamma, cdouble zeta,
                                 const CubicOptions& opts) {
    const ProtocolBase base = noiseless(base_in);
    const auto coeffs = base.coefficients();
    const double rise_s = std::min(base.rise, opts.squeeze_duration / 2);
    const double rise_c = std::min(base.rise, opts.cubic_duration / 2);
    CubicCalibration cal;

    // Squeezing: weak probe for the rate, then one correction at the operating point.
    {
        const auto rates = drive_rates(coeffs, 2.0 * coeffs.omega0);
        DriveSpec probe = drive_for_target(GateFamily::Squeezing, std::abs(rates.zeta_rate), 0.05,
                                           opts.squeeze_duration, rise_s);
        probe.phase = 0.0;
        DensityMatrix rho;
        run_gate_pulse(base, GateFamily::Squeezing, probe, opts.fit, &rho);
        cal.squeeze_rate = fock_estimate(GateFamily::Squeezing, rho) /
                           (probe.amplitude * probe.envelope.effective_gate_time());
        cal.squeeze = drive_for_target(GateFamily::Squeezing, cal.squeeze_rate, zeta, opts.squeeze_duration, rise_s);
        if (std::abs(zeta) > 0.0) {
            const auto p = run_gate_pulse(base, GateFamily::Squeezing, cal.squeeze, opts.fit);
            if (std::abs(p.param) > 0.0) {
                cal.squeeze.amplitude *= std::abs(zeta) / std::abs(p.param);
                cal.squeeze.phase = wrap_angle(cal.squeeze.phase + std::arg(p.param) - std::arg(zeta));
            }
        } else {
            cal.squeeze.amplitude = 0.0;
        }
    }

    const double t_cubic = PulseEnvelope::with_duration(opts.cubic_duration, rise_c).effective_gate_time();
    const double g3 = std::abs(coeffs.g_ac[3]);
    const double phi_pred = g3 > 0.0 ? std::abs(gamma) / (std::sqrt(2.0) * g3 * t_cubic) : 0.0;
    const double g1 = coeffs.g_ac[1];
    const double charge_offset = g1 > 0.0 ? kPi : 0.0;
    // The cubic generator -gamma/(2 sqrt 2) (a^dag^3 + 3 a^dag^2 a + 3 a^dag + h.c.)
    // fixes the a^dag^3 and a^dag coefficients of H T.
    const cdouble want3 = -gamma / (2.0 * std::sqrt(2.0));
    const cdouble want1 = 3.0 * want3;

    DriveSpec tri;
    tri.harmonic = 3;
    tri.envelope = PulseEnvelope::with_duration(opts.cubic_duration, rise_c);
    DriveSpec cross = tri;
    cross.harmonic = 1;
    DriveSpec charge = cross;
    charge.line = DriveLine::Charge;

    if (gamma != 0.0 && phi_pred > 0.0) {
        // 3 omega0 probe on vacuum: tau per (phi T) at phase 0.
        tri.amplitude = phi_pred;
        DensityMatrix rho;
        run_gate_pulse(base, GateFamily::Trisqueezing, tri, opts.fit, &rho);
        cal.trisqueeze_rate = fock_estimate(GateFamily::Trisqueezing, rho) / (phi_pred * t_cubic);

        // 1 omega0 flux with the cancelling charge tone: alpha per (phi T) at phase 0.
        cross.amplitude = phi_pred;
        charge.amplitude = std::abs(g1) * phi_pred;
        charge.phase = charge_offset;
        auto cfg = base_config(base, coeffs);
        cfg.drives = {cross, charge};
        cfg.t_grid = {cross.end_time()};
        cal.cross_rate = evolve(cfg).mean_a.back() / (phi_pred * t_cubic);

        // Coefficient of H T per (phi T) at phase 0 is i * rate.
        auto place = [&](DriveSpec& d, cdouble rate, cdouble want) {
            const cdouble h = cdouble(0.0, 1.0) * rate;
            if (std::abs(h) == 0.0) throw CalibrationError("calibrate_cubic: vanishing drive response");
            d.amplitude = std::abs(want) / (std::abs(h) * t_cubic);
            d.phase = wrap_angle(std::arg(h) - std::arg(want));
        };
        place(tri, cal.trisqueeze_rate, want3);
        place(cross, cal.cross_rate, want1);
        charge.amplitude = std::abs(g1) * cross.amplitude;
        charge.phase = wrap_angle(cross.phase + charge_offset);
    } else {
        tri.amplitude = cross.amplitude = charge.amplitude = 0.0;
    }

    // Charge response per (xi T) at phase 0, used to trim residual displacement.
    auto charge_rate = [&](const PulseEnvelope& env) {
        DriveSpec probe;
        probe.line = DriveLine::Charge;
        probe.harmonic = 1;
        probe.envelope = env;
        probe.amplitude = 0.2 / env.effective_gate_time();
        auto cfg = base_config(base, coeffs);
        cfg.drives = {probe};
        cfg.t_grid = {probe.end_time()};
        const cdouble r = evolve(cfg).mean_a.back() / (probe.amplitude * env.effective_gate_time());
        if (std::abs(r) == 0.0) throw CalibrationError("calibrate_cubic: vanishing charge response");
        return r;
    };
    auto end_mean_a = [&](const std::vector<DriveSpec>& drives, double t) {
        auto cfg = base_config(base, coeffs);
        for (const auto& d : drives)
            if (d.amplitude > 0.0) cfg.drives.push_back(d);
        cfg.t_grid = {t};
        return evolve(cfg).mean_a.back();
    };

    // The squeezing pulse leaves a small off-resonant displacement; a 1 omega0
    // charge tone over the same window removes it.
    cal.squeeze_trim.line = DriveLine::Charge;
    cal.squeeze_trim.harmonic = 1;
    cal.squeeze_trim.envelope = cal.squeeze.envelope;
    cal.squeeze_trim.amplitude = 0.0;
    if (cal.squeeze.amplitude > 0.0 && opts.trim_iterations > 0) {
        const cdouble rs = charge_rate(cal.squeeze.envelope);
        const double ts = cal.squeeze.envelope.effective_gate_time();
        for (int it = 0; it < opts.trim_iterations; ++it) {
            const cdouble m = end_mean_a({cal.squeeze, cal.squeeze_trim}, cal.squeeze.end_time());
            set_phasor(cal.squeeze_trim, phasor(cal.squeeze_trim) - m / (rs * ts));
        }
    }

    // The cubic tones start when the squeezing pulse ends; keep their carriers
    // referenced to t = 0 so the calibrated phases carry over.
    const double delay = opts.squeeze_duration;
    auto delayed = [&](DriveSpec d) {
        d.delay = delay;
        d.phase = wrap_angle(d.phase + d.harmonic * coeffs.omega0 * delay);
        return d;
    };

    // Tune the charge tone until the whole sequence ends at the ideal mean field.
    if (gamma != 0.0 && opts.trim_iterations > 0) {
        StateParams ideal;
        ideal.family = StateFamily::Cubic;
        ideal.zeta = zeta;
        ideal.gamma = gamma;
        const cdouble want = DensityMatrix::from_ket(make_ket(ideal, base.dim)).mean_a();
        const cdouble rc = charge_rate(charge.envelope);
        const double t_end = opts.squeeze_duration + opts.cubic_duration;
        for (int it = 0; it < opts.trim_iterations; ++it) {
            const cdouble m = end_mean_a(
                {cal.squeeze, cal.squeeze_trim, delayed(tri), delayed(cross), delayed(charge)}, t_end);
            set_phasor(charge, phasor(charge) + (want - m) / (rc * t_cubic));
        }
    }
    cal.trisqueeze = delayed(tri);
    cal.cross = delayed(cross);
    cal.charge = delayed(charge);
    return cal;
}

CubicResult run_cubic_sequence(const ProtocolBase& base, const CubicCalibration& cal, double gamma,
                               cdouble zeta, const CubicOptions& opts, bool fit_wigner) {
    const auto coeffs = base.coefficients();
    auto cfg = base_config(base, coeffs);
    for (const auto& d : cal.drives())
        if (d.amplitude > 0.0) cfg.drives.push_back(d);
    const double t_mid = opts.squeeze_duration + 0.5 * opts.cubic_duration;
    const double t_end = opts.squeeze_duration + opts.cubic_duration;
    cfg.t_grid = {t_mid, t_end};
    const auto tr = evolve(cfg);

    CubicResult out;
    out.calibration = cal;
    out.state = tr.states.back();
    out.mid_gate_mean_a = tr.mean_a[0];
    StateParams half;
    half.family = StateFamily::Cubic;
    half.zeta = zeta;
    half.gamma = 0.5 * gamma;
    const auto ideal_mid = DensityMatrix::from_ket(make_ket(half, base.dim));
    out.mid_gate_residual = std::abs(out.mid_gate_mean_a - ideal_mid.mean_a());
    if (out.mid_gate_residual > opts.max_mid_residual) {
        std::ostringstream msg;
        msg << "cubic sequence: displacement residual " << out.mid_gate_residual
            << " exceeds " << opts.max_mid_residual << " mid-gate; charge/flux cancellation is miscalibrated";
        throw CalibrationError(msg.str());
    }

    StateParams guess;
    guess.family = StateFamily::Cubic;
    guess.zeta = zeta;
    guess.gamma = gamma;
    if (fit_wigner) {
        StateFitOptions fo = opts.fit;
        fo.dim = base.dim;
        out.fit = fit_state(wigner(out.state, base.grid), FitFamily::Cubic, guess, fo);
        guess = out.fit.params;
    }
    out.closest = best_cubic_fidelity(out.state, guess, true);
    return out;
}

CubicResult protocol_cubic_state(const ProtocolBase& base, double gamma, cdouble zeta,
                                 const CubicOptions& opts) {
    const auto cal = calibrate_cubic(base, gamma, zeta, opts);
    return run_cubic_sequence(base, cal, gamma, zeta, opts, true);
}

// ----------------------------------------------------------- delay calibration

double delay_cost(const ProtocolBase& base_in, const DelayCalOptions& opts, double flux_delay) {
    ProtocolBase base = base_in;
    base.dim = opts.dim;
    const auto coeffs = base.coefficients();
    base.integrator.max_step = opts.max_step > 0.0 ? opts.max_step : 0.5 * default_max_step(coeffs.omega0);
    auto cfg = base_config(base, coeffs);
    const double shift = std::max(0.0, -std::min(flux_delay, opts.injected));
    const auto env = PulseEnvelope::with_duration(opts.pulse, std::min(base.rise, opts.pulse / 2));

    DriveSpec flux;
    flux.harmonic = 1;
    flux.amplitude = opts.flux_amplitude;
    flux.envelope = env;
    flux.delay = flux_delay + shift;
    DriveSpec charge = flux;
    charge.line = DriveLine::Charge;
    charge.amplitude = std::abs(coeffs.g_ac[1]) * opts.flux_amplitude;
    charge.delay = opts.injected + shift;
    // Each line's carrier phase is taken as calibrated; only the envelopes move.
    flux.phase = wrap_angle(coeffs.omega0 * flux.delay);
    charge.phase = wrap_angle((coeffs.g_ac[1] > 0.0 ? kPi : 0.0) + coeffs.omega0 * charge.delay);
    cfg.drives = {flux, charge};
    cfg.t_grid = {std::max(flux.end_time(), charge.end_time())};
    const auto rho = evolve(cfg).states.back();

    const auto w = wigner(rho, base.grid);
    StateParams vac;
    const auto w0 = wigner(make_state(vac, opts.dim), base.grid);
    return (w.values - w0.values).squaredNorm() / w0.values.squaredNorm();
}

DelayCalResult calibrate_delay(const ProtocolBase& base, const DelayCalOptions& opts) {
    DelayCalResult res;
    res.delays = opts.scan;
    if (res.delays.empty())
        for (int k = 0; k <= 16; ++k) res.delays.push_back(k * 1e-9);
    std::sort(res.delays.begin(), res.delays.end());
    if (res.delays.size() < 3) throw std::invalid_argument("calibrate_delay: need at least 3 scan points");
    res.costs.resize(res.delays.size());
    parallel_for(static_cast<int>(res.delays.size()), base.threads,
                 [&](int i) { res.costs[i] = delay_cost(base, opts, res.delays[i]); });

    const auto it = std::min_element(res.costs.begin(), res.costs.end());
    const auto top = *std::max_element(res.costs.begin(), res.costs.end());
    if (top - *it <= 1e-3 * top || top < 1e-10)
        throw CalibrationError("calibrate_delay: flat cost curve; increase the drive amplitude");
    std::size_t k = static_cast<std::size_t>(it - res.costs.begin());
    if (k == 0 || k + 1 == res.delays.size())
        throw CalibrationError("calibrate_delay: optimum at the edge of the scan; widen the scan");
    double opt = parabola_vertex(res.delays[k - 1], res.costs[k - 1], res.delays[k], res.costs[k],
                                 res.delays[k + 1], res.costs[k + 1]);

    // Fine pass: quadratic least squares on five points around the coarse vertex.
    const double h = 0.25 * (res.delays[k + 1] - res.delays[k - 1]) / 2.0;
    std::vector<double> xs, ys(5);
    for (int j = -2; j <= 2; ++j) xs.push_back(opt + j * h);
    parallel_for(5, base.threads, [&](int i) { ys[i] = delay_cost(base, opts, xs[i]); });
    Eigen::MatrixXd a(5, 3);
    Eigen::VectorXd y(5);
    for (int i = 0; i < 5; ++i) {
        const double u = (xs[i] - opt) / h;
        a(i, 0) = 1.0;
        a(i, 1) = u;
        a(i, 2) = u * u;
        y(i) = ys[i];
    }
    const Eigen::Vector3d q = a.colPivHouseholderQr().solve(y);
    if (q(2) > 0.0) {
        const double u = std::clamp(-q(1) / (2.0 * q(2)), -2.0, 2.0);
        opt += u * h;
    }
    for (int i = 0; i < 5; ++i) {
        res.delays.push_back(xs[i]);
        res.costs.push_back(ys[i]);
    }
    res.optimum = opt;
    res.cost_at_optimum = delay_cost(base, opts, opt);
    return res;
}

// --------------------------------------------------------------- error budget

ProtocolBase remove_channels(const ProtocolBase& base, const std::string& removal) {
    ProtocolBase b = base;
    std::stringstream ss(removal);
    std::string tok;
    while (std::getline(ss, tok, '+')) {
        if (tok == "none" || tok.empty()) continue;
        if (tok == "all") {
            b.noise.reset();
        } else if (tok == "dephasing") {
            if (b.noise) b.noise->t_phi = std::numeric_limits<double>::infinity();
        } else if (tok == "t1") {
            if (b.noise) b.noise->t1 = std::numeric_limits<double>::infinity();
        } else if (tok == "thermal") {
            if (b.noise) b.noise->n_th = 0.0;
        } else if (tok == "g5_g6") {
            b.n_max = std::min(b.n_max, 4);
        } else {
            throw std::invalid_argument("error budget: unknown channel '" + tok +
                                        "' (dephasing, t1, thermal, g5_g6, all)");
        }
    }
    if (b.noise && !b.noise->has_dissipation() && b.noise->n_th == 0.0) b.noise.reset();
    return b;
}

std::vector<BudgetRow> error_budget(const ProtocolBase& base, double gamma, cdouble zeta,
                                   const std::vector<std::string>& removals, const CubicOptions& opts,
                                   const CubicCalibration* calibration) {
    const CubicCalibration cal = calibration ? *calibration : calibrate_cubic(base, gamma, zeta, opts);
    std::vector<BudgetRow> rows(removals.size());
    for (std::size_t i = 0; i < removals.size(); ++i) remove_channels(base, removals[i]);  // validate early
    parallel_for(static_cast<int>(removals.size()), base.threads, [&](int i) {
        const auto b = remove_channels(base, removals[i]);
        CubicOptions o = opts;
        o.max_mid_residual = std::numeric_limits<double>::infinity();
        const auto r = run_cubic_sequence(b, cal, gamma, zeta, o, false);
        rows[i] = {removals[i], 1.0 - r.closest.fidelity, r.closest};
    });
    return rows;
}

}  // namespace snail
