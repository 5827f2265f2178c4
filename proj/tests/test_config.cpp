#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "snail/config.hpp"
#include "snail/runner.hpp"

using namespace snail;
namespace fs = std::filesystem;

namespace {

const std::string kCircuit =
    "circuit:\n"
    "  beta: 0.097\n"
    "  ej_ghz: 245\n"
    "  n_junctions: 3\n"
    "  omega_inf_ghz: 8.99\n"
    "  impedance_ohm: 57.94\n";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("snailsim_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("minimal config takes defaults") {
    const auto cfg = parse_config(kCircuit);
    CHECK(cfg.circuit.beta == 0.097);
    CHECK(cfg.circuit.n_junctions == 3);
    CHECK(cfg.circuit.omega_inf == doctest::Approx(kTwoPi * 8.99e9));
    CHECK_FALSE(cfg.noise.has_value());
    CHECK_FALSE(cfg.simulation.phi_e.has_value());
    CHECK(cfg.simulation.dim == 60);
    CHECK(cfg.simulation.n_max == 6);
    CHECK(resolved_flux(cfg) == doctest::Approx(0.3921).epsilon(1e-3));
}

TEST_CASE("flux bias accepts a number or kerr-free") {
    const auto a = parse_config(kCircuit + "simulation:\n  phi_e_phi0: 0.41\n");
    CHECK(*a.simulation.phi_e == 0.41);
    CHECK(resolved_flux(a) == 0.41);
    const auto b = parse_config(kCircuit + "simulation:\n  phi_e_phi0: kerr-free\n");
    CHECK_FALSE(b.simulation.phi_e.has_value());
}

TEST_CASE("noise from T2 star") {
    const auto cfg = parse_config(kCircuit + "noise:\n  t1_us: 28\n  t2_star_us: 2.8\n  n_th: 0.024\n");
    REQUIRE(cfg.noise.has_value());
    CHECK(parse_config(emit_config(cfg)).noise->t_phi == cfg.noise->t_phi);
    CHECK_THROWS_AS(parse_config(kCircuit + "noise:\n  t1_us: 28\n  t2_star_us: 2.8\n  t_phi_us: 3\n"),
                    ConfigError);
    CHECK(cfg.noise->t1 == doctest::Approx(28e-6));
    CHECK(1.0 / cfg.noise->t_phi == doctest::Approx(1.0 / 2.8e-6 - 1.0 / 56e-6));
    CHECK(cfg.noise->n_th == 0.024);
}

TEST_CASE("errors carry the location or the violated invariant") {
    const std::string bad = kCircuit + "simulation:\n  dim: 20\n  dimm: 30\n";
    CHECK_THROWS_WITH_AS(parse_config(bad, "x.yaml"), doctest::Contains("x.yaml:9"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(bad, "x.yaml"), doctest::Contains("simulation.dimm"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(kCircuit + "noise:\n  t1_us: -1\n  t2_star_us: 2.8\n"),
                         doctest::Contains("t1 > 0"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(kCircuit + "simulation:\n  dim: 1\n"), doctest::Contains("dim >= 2"),
                         ConfigError);
    CHECK_THROWS_AS(parse_config(kCircuit + "simulation:\n  dim: [1\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/snail.yaml"), ConfigError);
}

TEST_CASE("emit and parse round trip bit for bit") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        // values are drawn in the config's own units, as a user would write them
        auto cfg = parse_config(kCircuit);
        cfg.circuit.beta = 0.02 + 0.2 * u(rng);
        cfg.circuit.ej_ghz = 100.0 + 300.0 * u(rng);
        cfg.circuit.impedance = 30.0 + 60.0 * u(rng);
        cfg.circuit.omega_inf = kTwoPi * ((7.0 + 3.0 * u(rng)) * 1e9);
        cfg.noise = NoiseModel{(1.0 + 50.0 * u(rng)) / 1e6, (1.0 + 10.0 * u(rng)) / 1e6, 0.1 * u(rng)};
        cfg.simulation.phi_e = u(rng) * 0.5;
        cfg.simulation.rise = (1.0 + 9.0 * u(rng)) / 1e9;
        cfg.simulation.dim = 10 + trial;
        cfg.cubic.gamma = u(rng) * 0.2;
        cfg.cubic.zeta = {-u(rng), u(rng) * 0.1};
        cfg.simulate.duration = (10.0 + 100.0 * u(rng)) / 1e9;
        DriveSpec d;
        d.line = trial % 2 ? DriveLine::Charge : DriveLine::Flux;
        d.harmonic = 1 + trial % 3;
        d.amplitude = d.line == DriveLine::Charge ? kTwoPi * (u(rng) * 1e6) : 0.01 * u(rng);
        d.phase = u(rng) * 6.0 - 3.0;
        d.delay = u(rng) / 1e9;
        d.envelope = {2.0 * u(rng) / 1e9, 10.0 * u(rng) / 1e9};
        cfg.simulate.drives = {d};

        const std::string text = emit_config(cfg, "simulate");
        const auto back = parse_config(text);
        CHECK(emit_config(back, "simulate") == text);
        CHECK(back.circuit.beta == cfg.circuit.beta);
        CHECK(back.circuit.omega_inf == cfg.circuit.omega_inf);
        CHECK(back.circuit.impedance == cfg.circuit.impedance);
        CHECK(back.noise->t1 == cfg.noise->t1);
        CHECK(back.noise->t_phi == cfg.noise->t_phi);
        CHECK(*back.simulation.phi_e == *cfg.simulation.phi_e);
        CHECK(back.simulation.rise == cfg.simulation.rise);
        CHECK(back.simulate.duration == cfg.simulate.duration);
        REQUIRE(back.simulate.drives.size() == 1);
        CHECK(back.simulate.drives[0].amplitude == d.amplitude);
        CHECK(back.simulate.drives[0].phase == d.phase);
        CHECK(back.simulate.drives[0].delay == d.delay);
        CHECK(back.simulate.drives[0].envelope.rise == d.envelope.rise);
        CHECK(back.simulate.drives[0].envelope.hold == d.envelope.hold);
        CHECK(back.cubic.zeta == cfg.cubic.zeta);
    }
}

TEST_CASE("coeffs run, manifest replay and untouched input") {
    const auto dir = scratch_dir("coeffs");
    const auto input = dir / "in.yaml";
    {
        std::ofstream f(input);
        f << kCircuit << "protocol:\n  coeffs:\n    start_phi0: 0.30\n    stop_phi0: 0.45\n    points: 151\n";
    }
    const std::string before = slurp(input);
    std::ostringstream log;
    const auto files = run("coeffs", load_config(input.string()), dir / "a", log);
    CHECK(slurp(input) == before);
    REQUIRE_FALSE(files.empty());
    CHECK(files.back().filename() == "manifest.yaml");

    const auto rows = read_csv(dir / "a" / "coeffs.csv");
    REQUIRE(rows.size() == 152);
    int k1_col = -1;
    for (std::size_t j = 0; j < rows[0].size(); ++j)
        if (rows[0][j] == "K1_MHz") k1_col = static_cast<int>(j);
    REQUIRE(k1_col >= 0);
    std::size_t nearest = 1;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (std::abs(std::stod(rows[i][0]) - 0.393) < std::abs(std::stod(rows[nearest][0]) - 0.393)) nearest = i;
    CHECK(std::abs(std::stod(rows[nearest][k1_col])) < 0.1);

    run("coeffs", load_config((dir / "a" / "manifest.yaml").string()), dir / "b", log);
    for (const auto& name : {"coeffs.csv", "manifest.yaml"})
        CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
    fs::remove_all(dir);
}

TEST_CASE("idle simulate run and replay") {
    const auto dir = scratch_dir("simulate");
    auto cfg = parse_config(kCircuit +
                            "simulation:\n  phi_e_phi0: kerr-free\n  dim: 12\n"
                            "protocol:\n  simulate:\n    duration_ns: 10\n    sample_ns: 1\n"
                            "    drives: []\n    wigner_at_ns: [0, 10]\n");
    std::ostringstream log;
    const auto files = run("simulate", cfg, dir / "a", log);
    const auto rows = read_csv(dir / "a" / "trajectory.csv");
    REQUIRE(rows.size() == 12);
    CHECK(rows[0][3] == "n");
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][3]) < 1e-3);
    const auto rho = read_state_csv(dir / "a" / "state_final_re.csv", dir / "a" / "state_final_im.csv");
    CHECK(rho.dim() == 12);
    CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-8));

    run("simulate", load_config((dir / "a" / "manifest.yaml").string()), dir / "b", log);
    for (const auto& f : files) CHECK(slurp(f) == slurp(dir / "b" / f.filename()));
    fs::remove_all(dir);
}

TEST_CASE("budget requires a noise model") {
    const auto dir = scratch_dir("budget");
    std::ostringstream log;
    CHECK_THROWS(run("budget", parse_config(kCircuit), dir, log));
    CHECK_THROWS(run("no-such-command", parse_config(kCircuit), dir, log));
    fs::remove_all(dir);
}

}
