#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "snail/protocols.hpp"

using namespace snail;

namespace {

ProtocolBase closed_base(double phi_e, int dim) {
    ProtocolBase b;
    b.circuit = device_params();
    b.phi_e = phi_e;
    b.dim = dim;
    return b;
}

}  // namespace

TEST_SUITE("protocols") {

TEST_CASE("return angle of a rotated coherent state") {
    for (double psi : {-0.3, 0.0, 0.17, 1.2}) {
        StateParams s;
        s.family = StateFamily::Coherent;
        s.alpha = std::polar(1.0, psi);
        const auto rho = make_state(s, 30);
        const auto [angle, overlap] = best_return_angle(rho, 1.0, 64);
        CHECK(std::abs(angle - psi) < 1e-4);
        CHECK(overlap == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(return_overlap(rho, 1.0, psi + 0.5) < overlap);
    }
}

TEST_CASE("gate families") {
    CHECK(harmonic_of(GateFamily::Displacement) == 1);
    CHECK(harmonic_of(GateFamily::Squeezing) == 2);
    CHECK(harmonic_of(GateFamily::Trisqueezing) == 3);
    for (auto k : {GateFamily::Displacement, GateFamily::Squeezing, GateFamily::Trisqueezing})
        CHECK(gate_family_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(gate_family_from_string("cubic"), std::invalid_argument);
}

TEST_CASE("zero-amplitude squeeze pulse leaves vacuum") {
    const auto base = closed_base(0.392129, 30);
    DriveSpec d;
    d.harmonic = 2;
    d.amplitude = 0.0;
    d.envelope = PulseEnvelope::with_duration(20e-9, base.rise);
    const auto p = run_gate_pulse(base, GateFamily::Squeezing, d, {});
    CHECK(std::abs(p.param) < 0.02);
}

TEST_CASE("target drive inverts the measured rate") {
    const cdouble rate = std::polar(2e9, 0.3);
    const auto d = drive_for_target(GateFamily::Squeezing, rate, {-0.5, 0.0}, 20e-9, 5e-9);
    CHECK(d.harmonic == 2);
    // parameter = rate * A * T * exp(-i phase)
    const cdouble got = rate * d.amplitude * d.envelope.effective_gate_time() * std::exp(cdouble(0, -d.phase));
    CHECK(std::abs(got - cdouble(-0.5, 0.0)) < 1e-12);
}

TEST_CASE("cubic sequence with all drives off returns vacuum") {
    const auto base = closed_base(0.392129, 30);
    CubicCalibration cal;
    CubicOptions opts;
    opts.max_mid_residual = 1.0;
    cal.squeeze.harmonic = 2;
    cal.squeeze.envelope = PulseEnvelope::with_duration(opts.squeeze_duration, base.rise);
    for (DriveSpec* d : {&cal.trisqueeze, &cal.cross, &cal.charge, &cal.squeeze_trim})
        d->envelope = PulseEnvelope::with_duration(opts.cubic_duration, base.rise);
    cal.trisqueeze.harmonic = 3;
    cal.charge.line = DriveLine::Charge;
    cal.squeeze_trim.line = DriveLine::Charge;
    const auto r = run_cubic_sequence(base, cal, 0.0, 0.0, opts, false);
    CHECK(fidelity(r.state, make_state({}, base.dim)) > 0.999);
}

TEST_CASE("delay calibration without injected offset") {
    auto base = closed_base(0.41, 40);
    DelayCalOptions o;
    o.injected = 0.0;
    o.dim = 40;
    for (int k = -4; k <= 4; ++k) o.scan.push_back(2e-9 * k);
    const auto r = calibrate_delay(base, o);
    CHECK(std::abs(r.optimum) < 0.2e-9);
    CHECK(r.cost_at_optimum < 0.1 * delay_cost(base, o, 5e-9));
    CHECK(r.cost_at_optimum < 0.1 * delay_cost(base, o, -5e-9));

    DelayCalOptions edge = o;
    edge.scan = {2e-9, 4e-9, 6e-9};
    CHECK_THROWS_AS(calibrate_delay(base, edge), CalibrationError);
}

TEST_CASE("noise channel removal") {
    auto base = closed_base(0.39, 20);
    base.noise = device_noise();
    CHECK(remove_channels(base, "none").noise->t1 == base.noise->t1);
    CHECK(std::isinf(remove_channels(base, "dephasing").noise->t_phi));
    CHECK(std::isinf(remove_channels(base, "t1").noise->t1));
    CHECK(remove_channels(base, "thermal").noise->n_th == 0.0);
    CHECK(remove_channels(base, "g5_g6").n_max == 4);
    CHECK_FALSE(remove_channels(base, "all").noise.has_value());
    CHECK_FALSE(remove_channels(base, "dephasing+t1+thermal").noise.has_value());
    CHECK(remove_channels(base, "all").n_max == 6);
    CHECK_THROWS_WITH_AS(remove_channels(base, "flux"), doctest::Contains("unknown channel"),
                         std::invalid_argument);
}

TEST_CASE("initial state follows the noise model") {
    auto base = closed_base(0.39, 20);
    CHECK(base.initial_state().family == StateFamily::Vacuum);
    base.noise = device_noise();
    CHECK(base.initial_state().family == StateFamily::Thermal);
    CHECK(base.initial_state().n_th == doctest::Approx(0.024));
}

}
