#include "snail/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "snail/csv.hpp"
#include "snail/effective.hpp"

namespace snail {

namespace {

// Unit conversions. Reading divides or multiplies by exact constants; writing
// searches the neighbouring doubles so that reading back is bit-exact.
constexpr double kNs = 1e9, kUs = 1e6, kPs = 1e12;

double from_ns(double v) { return v / kNs; }
double from_us(double v) { return v / kUs; }
double from_ps(double v) { return v / kPs; }
double from_ghz(double v) { return kTwoPi * (v * 1e9); }
double from_mhz(double v) { return kTwoPi * (v * 1e6); }

double encode(double si, double guess, const std::function<double(double)>& parse) {
    if (!std::isfinite(si) || parse(guess) == si) return guess;
    double up = guess, down = guess;
    for (int k = 0; k < 256; ++k) {
        up = std::nextafter(up, std::numeric_limits<double>::infinity());
        if (parse(up) == si) return up;
        down = std::nextafter(down, -std::numeric_limits<double>::infinity());
        if (parse(down) == si) return down;
    }
    return guess;
}

double to_ns(double s) { return encode(s, s * kNs, from_ns); }
double to_us(double s) { return encode(s, s * kUs, from_us); }
double to_ps(double s) { return encode(s, s * kPs, from_ps); }
double to_ghz(double w) { return encode(w, w / kTwoPi / 1e9, from_ghz); }
double to_mhz(double w) { return encode(w, w / kTwoPi / 1e6, from_mhz); }

std::string where(const YAML::Node& n, const std::string& source) {
    const auto m = n.Mark();
    if (m.is_null()) return source;
    return source + ":" + std::to_string(m.line + 1);
}

// A mapping whose keys are consumed one by one; leftovers are reported.
class Block {
public:
    Block(YAML::Node node, std::string path, const std::string& source)
        : node_(std::move(node)), path_(std::move(path)), source_(source) {
        if (node_ && !node_.IsNull() && !node_.IsMap())
            throw ConfigError(where(node_, source_) + ": '" + path_ + "' must be a mapping");
    }

    bool present() const { return node_ && node_.IsMap(); }

    YAML::Node take(const std::string& key) {
        allowed_.insert(key);
        if (!present()) return YAML::Node();
        return node_[key];
    }

    template <class T>
    void read(const std::string& key, T& out) {
        const auto n = take(key);
        if (!n || n.IsNull()) return;
        out = as<T>(n, key);
    }

    void read_scaled(const std::string& key, double& out, double (*conv)(double)) {
        const auto n = take(key);
        if (!n || n.IsNull()) return;
        out = conv(as<double>(n, key));
    }

    void read_list(const std::string& key, std::vector<double>& out, double (*conv)(double) = nullptr) {
        const auto n = take(key);
        if (!n || n.IsNull()) return;
        if (!n.IsSequence()) throw ConfigError(where(n, source_) + ": '" + qualified(key) + "' must be a list");
        out.clear();
        for (const auto& e : n) {
            const double v = as<double>(e, key);
            out.push_back(conv ? conv(v) : v);
        }
    }

    Block sub(const std::string& key) { return Block(take(key), qualified(key), source_); }

    template <class T>
    T as(const YAML::Node& n, const std::string& key) const {
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(where(n, source_) + ": '" + qualified(key) + "' has the wrong type");
        }
    }

    /// Reject keys that no reader asked for.
    void finish() const {
        if (!present()) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (allowed_.count(key)) continue;
            std::string list;
            for (const auto& a : allowed_) list += (list.empty() ? "" : ", ") + a;
            throw ConfigError(where(kv.first, source_) + ": unknown key '" + qualified(key) +
                              "' (allowed: " + list + ")");
        }
    }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    const std::string& source() const { return source_; }

private:
    YAML::Node node_;
    std::string path_;
    const std::string& source_;
    std::set<std::string> allowed_;
};

StateFamily family_from_string(const std::string& s, const std::string& ctx) {
    static const std::map<std::string, StateFamily> m{
        {"vacuum", StateFamily::Vacuum},       {"coherent", StateFamily::Coherent},
        {"thermal", StateFamily::Thermal},     {"squeezed", StateFamily::Squeezed},
        {"trisqueezed", StateFamily::Trisqueezed}, {"cubic", StateFamily::Cubic}};
    const auto it = m.find(s);
    if (it == m.end())
        throw ConfigError(ctx + ": unknown state family '" + s +
                          "' (vacuum, coherent, thermal, squeezed, trisqueezed, cubic)");
    return it->second;
}

std::string to_string(StateFamily f) {
    switch (f) {
        case StateFamily::Vacuum: return "vacuum";
        case StateFamily::Coherent: return "coherent";
        case StateFamily::Thermal: return "thermal";
        case StateFamily::Squeezed: return "squeezed";
        case StateFamily::Trisqueezed: return "trisqueezed";
        case StateFamily::Cubic: return "cubic";
    }
    return "?";
}

void read_complex(Block& b, const std::string& stem, cdouble& out) {
    double re = out.real(), im = out.imag();
    b.read(stem + "_re", re);
    b.read(stem + "_im", im);
    out = {re, im};
}

void read_initial(Block b, StateParams& s) {
    std::string family = to_string(s.family);
    b.read("family", family);
    s.family = family_from_string(family, where(YAML::Node(), b.source()));
    read_complex(b, "alpha", s.alpha);
    read_complex(b, "zeta", s.zeta);
    read_complex(b, "tau", s.tau);
    b.read("n_th", s.n_th);
    b.read("gamma", s.gamma);
    b.finish();
}

DriveSpec read_drive(const YAML::Node& n, const std::string& path, const std::string& source) {
    Block b(n, path, source);
    DriveSpec d;
    std::string line = "flux";
    b.read("line", line);
    if (line == "flux") {
        d.line = DriveLine::Flux;
    } else if (line == "charge") {
        d.line = DriveLine::Charge;
    } else {
        throw ConfigError(where(n, source) + ": '" + path + ".line' must be flux or charge");
    }
    b.read("harmonic", d.harmonic);
    // Flux amplitudes are in Phi0, charge amplitudes are xi / 2 pi in MHz.
    if (d.line == DriveLine::Flux) {
        b.read("amplitude_phi0", d.amplitude);
    } else {
        b.read_scaled("amplitude_mhz", d.amplitude, from_mhz);
    }
    b.read("phase_rad", d.phase);
    b.read_scaled("delay_ns", d.delay, from_ns);
    b.read_scaled("rise_ns", d.envelope.rise, from_ns);
    b.read_scaled("hold_ns", d.envelope.hold, from_ns);
    b.finish();
    return d;
}

}  // namespace

void RunConfig::validate() const {
    auto guard = [](const char* block, const std::function<void()>& f) {
        try {
            f();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string(block) + ": " + e.what());
        }
    };
    guard("circuit", [&] { circuit.validate(); });
    guard("circuit", [&] { flux.validate(); });
    if (noise) guard("noise", [&] { noise->validate(); });

    const auto& s = simulation;
    if (s.dim < 2) throw ConfigError("simulation: dim >= 2 violated");
    if (s.n_max < 3 || s.n_max > 12) throw ConfigError("simulation: 3 <= n_max <= 12 violated");
    if (!(s.rise >= 0.0)) throw ConfigError("simulation: rise_ns >= 0 violated");
    if (!(s.integrator.rtol > 0.0) || !(s.integrator.atol > 0.0))
        throw ConfigError("simulation: rtol > 0 and atol > 0 violated");
    if (!(s.integrator.max_step >= 0.0)) throw ConfigError("simulation: max_step_ps >= 0 violated");
    if (!(s.grid.extent > 0.0) || s.grid.points < 3)
        throw ConfigError("simulation: grid_extent > 0 and grid_points >= 3 violated");
    if (s.threads < 1) throw ConfigError("simulation: threads >= 1 violated");
    if (s.fit.restarts < 0 || s.fit.max_evaluations < 1)
        throw ConfigError("simulation: fit_restarts >= 0 and fit_max_evaluations >= 1 violated");

    if (!(fit.default_sigma_mhz > 0.0)) throw ConfigError("protocol.fit: default_sigma_mhz > 0 violated");
    for (const auto* sw : {&coeffs, &kerr_free.sweep})
        if (sw->points < 2 || !(sw->stop > sw->start))
            throw ConfigError("sweep: points >= 2 and stop > start violated");
    if (!(kerr_free.hi != kerr_free.lo)) throw ConfigError("protocol.kerr_free: bracket must have width");

    if (!(simulate.duration > 0.0) || !(simulate.sample > 0.0))
        throw ConfigError("protocol.simulate: duration_ns > 0 and sample_ns > 0 violated");
    for (const auto& d : simulate.drives) guard("protocol.simulate.drives", [&] { d.validate(); });
    for (double t : simulate.wigner_times)
        if (t < 0.0 || t > simulate.duration)
            throw ConfigError("protocol.simulate: 0 <= wigner_at_ns <= duration_ns violated");

    for (double a : out_and_back.a_mags)
        if (!(a > 0.0)) throw ConfigError("protocol.out_and_back: a_mags > 0 violated");
    if (!(out_and_back.options.pulse > 0.0) || !(out_and_back.options.wait >= 0.0) ||
        out_and_back.options.scan_angles < 8)
        throw ConfigError("protocol.out_and_back: pulse_ns > 0, wait_ns >= 0, scan_angles >= 8 violated");

    for (double a : squeeze_cal.amplitudes)
        if (!(a >= 0.0)) throw ConfigError("protocol.squeeze_cal: amplitudes_phi0 >= 0 violated");
    if (!(squeeze_cal.options.duration > 0.0))
        throw ConfigError("protocol.squeeze_cal: duration_ns > 0 violated");

    if (!(cubic.options.squeeze_duration > 0.0) || !(cubic.options.cubic_duration > 0.0))
        throw ConfigError("protocol.cubic: squeeze_ns > 0 and cubic_ns > 0 violated");
    if (!(cubic.options.max_mid_residual > 0.0))
        throw ConfigError("protocol.cubic: max_mid_residual > 0 violated");
    if (cubic.options.trim_iterations < 0) throw ConfigError("protocol.cubic: trim_iterations >= 0 violated");

    const auto& dc = delay_cal.options;
    if (!(dc.flux_amplitude > 0.0) || !(dc.pulse > 0.0) || dc.dim < 2)
        throw ConfigError("protocol.delay_cal: flux_amplitude_phi0 > 0, pulse_ns > 0, dim >= 2 violated");
    for (const auto& r : budget.removals) {
        ProtocolBase probe;
        probe.noise = NoiseModel{};
        try {
            remove_channels(probe, r);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("protocol.budget: ") + e.what());
        }
    }
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    RunConfig c;
    Block top(root, "", source);

    {
        Block run = top.sub("run");
        run.take("subcommand");
        run.take("version");
        run.finish();
    }
    {
        Block b = top.sub("circuit");
        b.read("beta", c.circuit.beta);
        b.read("ej_ghz", c.circuit.ej_ghz);
        b.read("n_junctions", c.circuit.n_junctions);
        b.read_scaled("omega_inf_ghz", c.circuit.omega_inf, from_ghz);
        b.read("impedance_ohm", c.circuit.impedance);
        b.read("flux_v0_v", c.flux.v0);
        b.read("flux_offset_phi0", c.flux.offset);
        b.finish();
    }
    {
        const auto node = top.take("noise");
        if (node && !node.IsNull()) {
            Block b(node, "noise", source);
            NoiseModel m;
            double t2_star = std::numeric_limits<double>::quiet_NaN();
            b.read_scaled("t1_us", m.t1, from_us);
            b.read_scaled("t2_star_us", t2_star, from_us);
            b.read_scaled("t_phi_us", m.t_phi, from_us);
            b.read("n_th", m.n_th);
            b.finish();
            if (b.take("t2_star_us") && b.take("t_phi_us"))
                throw ConfigError(where(node, source) + ": give either noise.t2_star_us or noise.t_phi_us");
            if (!std::isnan(t2_star)) {
                if (!(m.t1 > 0.0)) throw ConfigError("noise: t1 > 0 violated");
                const double rate = 1.0 / t2_star - 1.0 / (2.0 * m.t1);
                if (!(rate > 0.0)) throw ConfigError("noise: t_phi > 0 violated (requires T2* < 2 T1)");
                // keep t_phi on a value that microsecond text reproduces exactly
                m.t_phi = from_us((1.0 / rate) * kUs);
            }
            c.noise = m;
        }
    }
    {
        Block b = top.sub("simulation");
        auto& s = c.simulation;
        const auto phi = b.take("phi_e_phi0");
        if (phi && !phi.IsNull()) {
            if (phi.IsScalar() && phi.Scalar() == "kerr-free") {
                s.phi_e.reset();
            } else {
                s.phi_e = b.as<double>(phi, "phi_e_phi0");
            }
        }
        b.read("dim", s.dim);
        b.read("n_max", s.n_max);
        b.read_scaled("rise_ns", s.rise, from_ns);
        b.read("rtol", s.integrator.rtol);
        b.read("atol", s.integrator.atol);
        b.read_scaled("max_step_ps", s.integrator.max_step, from_ps);
        b.read("threads", s.threads);
        b.read("grid_extent", s.grid.extent);
        b.read("grid_points", s.grid.points);
        b.read("fit_restarts", s.fit.restarts);
        b.read("fit_max_evaluations", s.fit.max_evaluations);
        b.read("fit_spread_tol", s.fit.spread_tol);
        b.finish();
    }

    Block proto = top.sub("protocol");
    {
        Block b = proto.sub("fit");
        b.read("data_csv", c.fit.data_csv);
        b.read("default_sigma_mhz", c.fit.default_sigma_mhz);
        b.finish();
    }
    {
        Block b = proto.sub("coeffs");
        b.read("start_phi0", c.coeffs.start);
        b.read("stop_phi0", c.coeffs.stop);
        b.read("points", c.coeffs.points);
        b.finish();
    }
    {
        Block b = proto.sub("kerr_free");
        b.read("bracket_lo_phi0", c.kerr_free.lo);
        b.read("bracket_hi_phi0", c.kerr_free.hi);
        b.read("sweep_start_phi0", c.kerr_free.sweep.start);
        b.read("sweep_stop_phi0", c.kerr_free.sweep.stop);
        b.read("sweep_points", c.kerr_free.sweep.points);
        b.finish();
    }
    {
        Block b = proto.sub("simulate");
        auto& s = c.simulate;
        b.read_scaled("duration_ns", s.duration, from_ns);
        b.read_scaled("sample_ns", s.sample, from_ns);
        read_initial(b.sub("initial"), s.initial);
        const auto drives = b.take("drives");
        if (drives && !drives.IsNull()) {
            if (!drives.IsSequence())
                throw ConfigError(where(drives, source) + ": 'protocol.simulate.drives' must be a list");
            for (std::size_t k = 0; k < drives.size(); ++k)
                s.drives.push_back(read_drive(drives[k], "protocol.simulate.drives[" + std::to_string(k) + "]", source));
        }
        b.read_list("wigner_at_ns", s.wigner_times, from_ns);
        b.finish();
    }
    {
        Block b = proto.sub("out_and_back");
        auto& o = c.out_and_back;
        b.read_list("a_mags", o.a_mags);
        b.read_list("phi_e_phi0", o.phi_list);
        b.read_scaled("pulse_ns", o.options.pulse, from_ns);
        b.read_scaled("wait_ns", o.options.wait, from_ns);
        b.read("scan_angles", o.options.scan_angles);
        b.finish();
    }
    {
        Block b = proto.sub("squeeze_cal");
        auto& q = c.squeeze_cal;
        std::string kind = to_string(q.kind);
        b.read("kind", kind);
        try {
            q.kind = gate_family_from_string(kind);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(source + ": protocol.squeeze_cal: " + e.what());
        }
        b.read_list("amplitudes_phi0", q.amplitudes);
        b.read_scaled("duration_ns", q.options.duration, from_ns);
        b.read("linear_limit", q.options.linear_limit);
        b.read("phase_rad", q.options.phase);
        const auto re = b.take("target_re"), im = b.take("target_im");
        if ((re && !re.IsNull()) || (im && !im.IsNull())) {
            const double r = re && !re.IsNull() ? b.as<double>(re, "target_re") : 0.0;
            const double i = im && !im.IsNull() ? b.as<double>(im, "target_im") : 0.0;
            q.target = cdouble(r, i);
        }
        b.finish();
    }
    {
        Block b = proto.sub("cubic");
        auto& q = c.cubic;
        b.read("gamma", q.gamma);
        read_complex(b, "zeta", q.zeta);
        b.read_scaled("squeeze_ns", q.options.squeeze_duration, from_ns);
        b.read_scaled("cubic_ns", q.options.cubic_duration, from_ns);
        b.read("max_mid_residual", q.options.max_mid_residual);
        b.read("trim_iterations", q.options.trim_iterations);
        b.finish();
    }
    {
        Block b = proto.sub("delay_cal");
        auto& o = c.delay_cal.options;
        b.read("flux_amplitude_phi0", o.flux_amplitude);
        b.read_scaled("pulse_ns", o.pulse, from_ns);
        b.read_scaled("injected_ns", o.injected, from_ns);
        b.read_list("scan_ns", o.scan, from_ns);
        b.read("dim", o.dim);
        b.read_scaled("max_step_ps", o.max_step, from_ps);
        const auto phi = b.take("phi_e_phi0");
        if (phi && !phi.IsNull()) c.delay_cal.phi_e = b.as<double>(phi, "phi_e_phi0");
        b.finish();
    }
    {
        Block b = proto.sub("budget");
        const auto n = b.take("removals");
        if (n && !n.IsNull()) {
            if (!n.IsSequence()) throw ConfigError(where(n, source) + ": 'protocol.budget.removals' must be a list");
            c.budget.removals.clear();
            for (const auto& e : n) c.budget.removals.push_back(b.as<std::string>(e, "removals"));
        }
        b.finish();
    }
    proto.finish();
    top.finish();

    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

namespace {

std::string num(double v) {
    if (std::isnan(v)) return ".nan";
    if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
    return format_double(v);
}

std::string list(const std::vector<double>& v, double (*conv)(double) = nullptr) {
    std::string s = "[";
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + num(conv ? conv(v[k]) : v[k]);
    return s + "]";
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out + "\"";
}

}  // namespace

std::string emit_config(const RunConfig& c, const std::string& subcommand) {
    std::ostringstream o;
    if (!subcommand.empty()) o << "run:\n  subcommand: " << subcommand << "\n  version: 0.1.0\n";

    o << "circuit:\n"
      << "  beta: " << num(c.circuit.beta) << "\n"
      << "  ej_ghz: " << num(c.circuit.ej_ghz) << "\n"
      << "  n_junctions: " << c.circuit.n_junctions << "\n"
      << "  omega_inf_ghz: " << num(to_ghz(c.circuit.omega_inf)) << "\n"
      << "  impedance_ohm: " << num(c.circuit.impedance) << "\n"
      << "  flux_v0_v: " << num(c.flux.v0) << "\n"
      << "  flux_offset_phi0: " << num(c.flux.offset) << "\n";
    if (c.noise) {
        o << "noise:\n"
          << "  t1_us: " << num(to_us(c.noise->t1)) << "\n"
          << "  t_phi_us: " << num(to_us(c.noise->t_phi)) << "\n"
          << "  n_th: " << num(c.noise->n_th) << "\n";
    }
    const auto& s = c.simulation;
    o << "simulation:\n"
      << "  phi_e_phi0: " << (s.phi_e ? num(*s.phi_e) : std::string("kerr-free")) << "\n"
      << "  dim: " << s.dim << "\n"
      << "  n_max: " << s.n_max << "\n"
      << "  rise_ns: " << num(to_ns(s.rise)) << "\n"
      << "  rtol: " << num(s.integrator.rtol) << "\n"
      << "  atol: " << num(s.integrator.atol) << "\n"
      << "  max_step_ps: " << num(to_ps(s.integrator.max_step)) << "\n"
      << "  threads: " << s.threads << "\n"
      << "  grid_extent: " << num(s.grid.extent) << "\n"
      << "  grid_points: " << s.grid.points << "\n"
      << "  fit_restarts: " << s.fit.restarts << "\n"
      << "  fit_max_evaluations: " << s.fit.max_evaluations << "\n"
      << "  fit_spread_tol: " << num(s.fit.spread_tol) << "\n";

    o << "protocol:\n";
    o << "  fit:\n"
      << "    data_csv: " << quoted(c.fit.data_csv) << "\n"
      << "    default_sigma_mhz: " << num(c.fit.default_sigma_mhz) << "\n";
    o << "  coeffs:\n"
      << "    start_phi0: " << num(c.coeffs.start) << "\n"
      << "    stop_phi0: " << num(c.coeffs.stop) << "\n"
      << "    points: " << c.coeffs.points << "\n";
    o << "  kerr_free:\n"
      << "    bracket_lo_phi0: " << num(c.kerr_free.lo) << "\n"
      << "    bracket_hi_phi0: " << num(c.kerr_free.hi) << "\n"
      << "    sweep_start_phi0: " << num(c.kerr_free.sweep.start) << "\n"
      << "    sweep_stop_phi0: " << num(c.kerr_free.sweep.stop) << "\n"
      << "    sweep_points: " << c.kerr_free.sweep.points << "\n";

    const auto& sim = c.simulate;
    o << "  simulate:\n"
      << "    duration_ns: " << num(to_ns(sim.duration)) << "\n"
      << "    sample_ns: " << num(to_ns(sim.sample)) << "\n"
      << "    initial:\n"
      << "      family: " << to_string(sim.initial.family) << "\n"
      << "      alpha_re: " << num(sim.initial.alpha.real()) << "\n"
      << "      alpha_im: " << num(sim.initial.alpha.imag()) << "\n"
      << "      zeta_re: " << num(sim.initial.zeta.real()) << "\n"
      << "      zeta_im: " << num(sim.initial.zeta.imag()) << "\n"
      << "      tau_re: " << num(sim.initial.tau.real()) << "\n"
      << "      tau_im: " << num(sim.initial.tau.imag()) << "\n"
      << "      n_th: " << num(sim.initial.n_th) << "\n"
      << "      gamma: " << num(sim.initial.gamma) << "\n";
    if (sim.drives.empty()) {
        o << "    drives: []\n";
    } else {
        o << "    drives:\n";
        for (const auto& d : sim.drives) {
            const bool flux = d.line == DriveLine::Flux;
            o << "      - line: " << (flux ? "flux" : "charge") << "\n"
              << "        harmonic: " << d.harmonic << "\n";
            if (flux) {
                o << "        amplitude_phi0: " << num(d.amplitude) << "\n";
            } else {
                o << "        amplitude_mhz: " << num(to_mhz(d.amplitude)) << "\n";
            }
            o << "        phase_rad: " << num(d.phase) << "\n"
              << "        delay_ns: " << num(to_ns(d.delay)) << "\n"
              << "        rise_ns: " << num(to_ns(d.envelope.rise)) << "\n"
              << "        hold_ns: " << num(to_ns(d.envelope.hold)) << "\n";
        }
    }
    o << "    wigner_at_ns: " << list(sim.wigner_times, to_ns) << "\n";

    const auto& ob = c.out_and_back;
    o << "  out_and_back:\n"
      << "    a_mags: " << list(ob.a_mags) << "\n"
      << "    phi_e_phi0: " << list(ob.phi_list) << "\n"
      << "    pulse_ns: " << num(to_ns(ob.options.pulse)) << "\n"
      << "    wait_ns: " << num(to_ns(ob.options.wait)) << "\n"
      << "    scan_angles: " << ob.options.scan_angles << "\n";

    const auto& sq = c.squeeze_cal;
    o << "  squeeze_cal:\n"
      << "    kind: " << to_string(sq.kind) << "\n"
      << "    amplitudes_phi0: " << list(sq.amplitudes) << "\n"
      << "    duration_ns: " << num(to_ns(sq.options.duration)) << "\n"
      << "    linear_limit: " << num(sq.options.linear_limit) << "\n"
      << "    phase_rad: " << num(sq.options.phase) << "\n";
    if (sq.target)
        o << "    target_re: " << num(sq.target->real()) << "\n"
          << "    target_im: " << num(sq.target->imag()) << "\n";

    const auto& cu = c.cubic;
    o << "  cubic:\n"
      << "    gamma: " << num(cu.gamma) << "\n"
      << "    zeta_re: " << num(cu.zeta.real()) << "\n"
      << "    zeta_im: " << num(cu.zeta.imag()) << "\n"
      << "    squeeze_ns: " << num(to_ns(cu.options.squeeze_duration)) << "\n"
      << "    cubic_ns: " << num(to_ns(cu.options.cubic_duration)) << "\n"
      << "    max_mid_residual: " << num(cu.options.max_mid_residual) << "\n"
      << "    trim_iterations: " << cu.options.trim_iterations << "\n";

    const auto& dc = c.delay_cal;
    o << "  delay_cal:\n"
      << "    flux_amplitude_phi0: " << num(dc.options.flux_amplitude) << "\n"
      << "    pulse_ns: " << num(to_ns(dc.options.pulse)) << "\n"
      << "    injected_ns: " << num(to_ns(dc.options.injected)) << "\n"
      << "    scan_ns: " << list(dc.options.scan, to_ns) << "\n"
      << "    dim: " << dc.options.dim << "\n"
      << "    max_step_ps: " << num(to_ps(dc.options.max_step)) << "\n";
    if (dc.phi_e) o << "    phi_e_phi0: " << num(*dc.phi_e) << "\n";

    o << "  budget:\n    removals: [";
    for (std::size_t k = 0; k < c.budget.removals.size(); ++k)
        o << (k ? ", " : "") << quoted(c.budget.removals[k]);
    o << "]\n";
    return o.str();
}

double resolved_flux(const RunConfig& cfg) {
    if (cfg.simulation.phi_e) return *cfg.simulation.phi_e;
    return find_kerr_free_flux(cfg.circuit, cfg.kerr_free.lo, cfg.kerr_free.hi, cfg.simulation.n_max);
}

ProtocolBase make_protocol_base(const RunConfig& cfg) {
    ProtocolBase b;
    b.circuit = cfg.circuit;
    b.phi_e = resolved_flux(cfg);
    b.noise = cfg.noise;
    b.dim = cfg.simulation.dim;
    b.n_max = cfg.simulation.n_max;
    b.rise = cfg.simulation.rise;
    b.integrator = cfg.simulation.integrator;
    b.grid = cfg.simulation.grid;
    b.threads = cfg.simulation.threads;
    return b;
}

}  // namespace snail
