#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "snail/dynamics.hpp"
#include "snail/effective.hpp"
#include "snail/operators.hpp"

using namespace snail;

namespace {

TaylorCoefficients operating_point(double phi_e) {
    return hamiltonian_coefficients(phi_e, device_params(), 6);
}

TaylorCoefficients without_static_nonlinearity(TaylorCoefficients c) {
    for (auto& g : c.g_dc) g = 0.0;
    return c;
}

std::vector<double> grid(double stop, int n) {
    std::vector<double> t(n);
    for (int k = 0; k < n; ++k) t[k] = stop * k / (n - 1);
    return t;
}

double phase_of(cdouble z) { return std::arg(z); }

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("envelope shape") {
    PulseEnvelope e{4e-9, 10e-9};
    CHECK(e.duration() == doctest::Approx(18e-9));
    CHECK(e.value(-1e-9) == 0.0);
    CHECK(e.value(0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(e.value(4e-9) == doctest::Approx(1.0));
    CHECK(e.value(9e-9) == 1.0);
    CHECK(e.value(18e-9) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(e.value(19e-9) == 0.0);
    for (int k = 0; k <= 200; ++k) {
        const double v = e.value(18e-9 * k / 200.0);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    // area is hold + rise
    double area = 0.0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) area += e.value(18e-9 * (k + 0.5) / n) * 18e-9 / n;
    CHECK(area == doctest::Approx(e.effective_gate_time()).epsilon(1e-6));
    CHECK_THROWS_AS((PulseEnvelope{-1e-9, 0.0}).validate(), std::invalid_argument);
}

TEST_CASE("Hamiltonian without drives") {
    SimulationConfig cfg;
    cfg.coeffs = operating_point(0.39);
    cfg.dim = 12;
    const CMatrix h = hamiltonian_at(3e-9, cfg);
    const RMatrix want = cfg.coeffs.omega0 * ladder_operators(12).n;
    RMatrix extra = RMatrix::Zero(12, 12);
    for (int n = 3; n <= 6; ++n) extra += cfg.coeffs.g_dc[n] * quadrature_power(12, n);
    CHECK((h.real() - want - extra).cwiseAbs().maxCoeff() < 1e-6 * cfg.coeffs.omega0);
    CHECK(h.imag().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Hamiltonian at a flux carrier peak") {
    SimulationConfig cfg;
    cfg.coeffs = operating_point(0.39);
    cfg.dim = 10;
    DriveSpec d;
    d.harmonic = 2;
    d.amplitude = 0.003;
    d.envelope = {2e-9, 20e-9};
    cfg.drives = {d};
    const double period = kTwoPi / (2.0 * cfg.coeffs.omega0);
    const double t = period * std::ceil(5e-9 / period);
    SimulationConfig idle = cfg;
    idle.drives.clear();
    const CMatrix dh = hamiltonian_at(t, cfg) - hamiltonian_at(t, idle);
    RMatrix want = RMatrix::Zero(10, 10);
    for (int n = 1; n <= 6; ++n) want += d.amplitude * cfg.coeffs.g_ac[n] * quadrature_power(10, n);
    CHECK((dh.real() - want).cwiseAbs().maxCoeff() < 1e-6 * want.cwiseAbs().maxCoeff());
}

TEST_CASE("Hamiltonian is Hermitian at random times") {
    SimulationConfig cfg;
    cfg.coeffs = operating_point(0.393);
    cfg.dim = 15;
    DriveSpec flux;
    flux.harmonic = 3;
    flux.amplitude = 0.01;
    flux.phase = 0.4;
    flux.envelope = {5e-9, 30e-9};
    DriveSpec charge;
    charge.line = DriveLine::Charge;
    charge.amplitude = kTwoPi * 5e6;
    charge.phase = -1.1;
    charge.delay = 3e-9;
    charge.envelope = {5e-9, 30e-9};
    cfg.drives = {flux, charge};
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.0, 50e-9);
    for (int k = 0; k < 100; ++k) {
        const CMatrix h = hamiltonian_at(u(rng), cfg);
        CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-14 * h.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("vacuum is stationary without static nonlinearity") {
    SimulationConfig cfg;
    cfg.coeffs = without_static_nonlinearity(operating_point(0.393));
    cfg.dim = 10;
    cfg.t_grid = grid(50e-9, 6);
    const auto tr = evolve(cfg);
    const auto vac = make_state({}, cfg.dim);
    for (const auto& rho : tr.states) CHECK(fidelity(rho, vac) > 1.0 - 1e-8);
}

TEST_CASE("idle vacuum with the full coefficients stays close to vacuum") {
    SimulationConfig cfg;
    cfg.coeffs = operating_point(0.392129);
    cfg.dim = 20;
    cfg.t_grid = grid(50e-9, 11);
    const auto tr = evolve(cfg);
    for (double n : tr.mean_n) CHECK(n < 1e-3);
    for (double p : tr.purity) CHECK(p == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("idle vacuum fidelity to 1e-8 with the full coefficients" * doctest::may_fail()) {
    // Known discrepancy: g3 and counter-rotating terms dress the ground state.
    SimulationConfig cfg;
    cfg.coeffs = operating_point(0.392129);
    cfg.dim = 20;
    cfg.t_grid = grid(50e-9, 3);
    const auto tr = evolve(cfg);
    CHECK(fidelity(tr.states.back(), make_state({}, cfg.dim)) > 1.0 - 1e-8);
}

TEST_CASE("thermal steady state") {
    SimulationConfig cfg;
    cfg.coeffs = operating_point(0.392129);
    cfg.dim = 10;
    cfg.noise = NoiseModel{20e-9, std::numeric_limits<double>::infinity(), 0.024};
    cfg.t_grid = {0.0, 300e-9};
    const auto tr = evolve(cfg);
    CHECK(std::abs(tr.mean_n.back() - 0.024) < 1e-3);
    const auto d = diagnose(tr.states.back());
    CHECK(d.trace_error < 1e-8);
    CHECK(d.min_eigenvalue > -1e-8);
}

double simulated_drift(double a_mag, double phi_e) {
    const auto c = operating_point(phi_e);
    SimulationConfig cfg;
    cfg.coeffs = c;
    cfg.dim = 30;
    StateParams s;
    s.family = StateFamily::Coherent;
    s.alpha = a_mag;
    cfg.initial = s;
    cfg.t_grid = {0.0, 100e-9};
    return phase_of(evolve(cfg).mean_a.back()) / drift_angle(a_mag, 100e-9, effective_static(c));
}

TEST_CASE("weak coherent state drifts at the perturbative rate") {
    CHECK(std::abs(simulated_drift(0.5, 0.41) - 1.0) < 0.05);
}

TEST_CASE("unit coherent state drifts at the perturbative rate" * doctest::may_fail()) {
    // Known limit: K t is about 0.75 rad here, so the state smears and the mean phase lags the linear model.
    CHECK(std::abs(simulated_drift(1.0, 0.41) - 1.0) < 0.05);
}

TEST_CASE("trace, positivity and dephasing purity") {
    SimulationConfig cfg;
    cfg.coeffs = operating_point(0.39);
    cfg.dim = 12;
    cfg.noise = NoiseModel{1e-6, 200e-9, 0.02};
    StateParams s;
    s.family = StateFamily::Coherent;
    s.alpha = {0.6, -0.3};
    cfg.initial = s;
    DriveSpec d;
    d.harmonic = 2;
    d.amplitude = 0.004;
    d.envelope = {5e-9, 10e-9};
    cfg.drives = {d};
    cfg.t_grid = grid(40e-9, 9);
    const auto tr = evolve(cfg);
    for (const auto& rho : tr.states) {
        const auto dg = diagnose(rho);
        CHECK(dg.trace_error < 1e-8);
        CHECK(dg.min_eigenvalue > -1e-8);
        CHECK(dg.hermiticity < 1e-10);
    }

    // unital channel: purity never grows
    SimulationConfig pure = cfg;
    pure.drives.clear();
    pure.noise = NoiseModel{std::numeric_limits<double>::infinity(), 50e-9, 0.0};
    StateParams th;
    th.family = StateFamily::Thermal;
    th.n_th = 0.2;
    pure.initial = th;
    pure.t_grid = grid(60e-9, 13);
    const auto tp = evolve(pure);
    for (std::size_t k = 1; k < tp.purity.size(); ++k) CHECK(tp.purity[k] <= tp.purity[k - 1] + 1e-10);
}

TEST_CASE("rotating frame removes the free phase") {
    SimulationConfig cfg;
    cfg.coeffs = without_static_nonlinearity(operating_point(0.39));
    cfg.dim = 20;
    StateParams s;
    s.family = StateFamily::Squeezed;
    s.zeta = {0.3, -0.2};
    cfg.initial = s;
    cfg.t_grid = {0.0, 7.3e-9, 20e-9};
    const auto tr = evolve(cfg);
    for (const auto& rho : tr.states) CHECK(fidelity(rho, tr.states.front()) > 1.0 - 1e-8);
}

TEST_CASE("runs are bitwise deterministic") {
    SimulationConfig cfg;
    cfg.coeffs = operating_point(0.393);
    cfg.dim = 10;
    cfg.noise = device_noise();
    DriveSpec d;
    d.harmonic = 2;
    d.amplitude = 0.005;
    d.envelope = {3e-9, 4e-9};
    cfg.drives = {d};
    cfg.t_grid = {0.0, 5e-9, 10e-9};
    const auto a = evolve(cfg);
    const auto b = evolve(cfg);
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) CHECK(a.states[k].data == b.states[k].data);
}

TEST_CASE("configuration errors") {
    SimulationConfig cfg;
    cfg.coeffs = operating_point(0.39);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // empty grid
    cfg.t_grid = {1e-9, 0.0};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.t_grid = {0.0};
    cfg.dim = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK_THROWS_AS(NoiseModel::from_t2_star(1e-6, 3e-6, 0.0), std::invalid_argument);
    const auto n = NoiseModel::from_t2_star(28e-6, 2.8e-6, 0.024);
    CHECK(1.0 / n.t_phi == doctest::Approx(1.0 / 2.8e-6 - 1.0 / 56e-6));
}

}
