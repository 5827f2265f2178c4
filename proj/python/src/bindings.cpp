#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <stdexcept>

#include "snail/circuit.hpp"
#include "snail/config.hpp"
#include "snail/effective.hpp"
#include "snail/quantum.hpp"
#include "snail/runner.hpp"

namespace py = pybind11;
using namespace snail;

namespace {

StateFamily family_from_string(const std::string& s) {
    if (s == "vacuum") return StateFamily::Vacuum;
    if (s == "coherent") return StateFamily::Coherent;
    if (s == "thermal") return StateFamily::Thermal;
    if (s == "squeezed") return StateFamily::Squeezed;
    if (s == "trisqueezed") return StateFamily::Trisqueezed;
    if (s == "cubic") return StateFamily::Cubic;
    throw std::invalid_argument("unknown state family '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "snailsim core bindings";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<CircuitParams>(m, "CircuitParams")
        .def(py::init<>())
        .def_readwrite("beta", &CircuitParams::beta)
        .def_readwrite("ej_ghz", &CircuitParams::ej_ghz)
        .def_readwrite("n_junctions", &CircuitParams::n_junctions)
        .def_readwrite("omega_inf", &CircuitParams::omega_inf, "bare mode, rad/s")
        .def_readwrite("impedance", &CircuitParams::impedance, "ohm")
        .def("validate", &CircuitParams::validate);

    py::class_<TaylorCoefficients>(m, "TaylorCoefficients")
        .def_readonly("phi_e", &TaylorCoefficients::phi_e)
        .def_readonly("phi_m", &TaylorCoefficients::phi_m)
        .def_readonly("c", &TaylorCoefficients::c)
        .def_readonly("g_dc", &TaylorCoefficients::g_dc)
        .def_readonly("g_ac", &TaylorCoefficients::g_ac)
        .def_readonly("omega0", &TaylorCoefficients::omega0);

    m.def("device_params", &device_params);
    m.def("resonator_frequency",
          [](double phi_e, const CircuitParams& p) { return resonator_frequency(phi_e, p).omega0; },
          py::arg("phi_e"), py::arg("params"), "Dressed mode frequency in rad/s.");
    m.def("hamiltonian_coefficients", &hamiltonian_coefficients, py::arg("phi_e"), py::arg("params"),
          py::arg("n_max") = 6);
    m.def(
        "effective_static",
        [](const TaylorCoefficients& c) {
            const auto e = effective_static(c);
            return py::dict(py::arg("delta_omega") = e.delta_omega, py::arg("k1") = e.k1);
        },
        py::arg("coeffs"));
    m.def(
        "numeric_kerr_oracle",
        [](const TaylorCoefficients& c, int dim) {
            const auto o = numeric_kerr_oracle(c, dim);
            return py::dict(py::arg("delta_omega") = o.delta_omega, py::arg("k1") = o.k1,
                            py::arg("levels") = o.levels);
        },
        py::arg("coeffs"), py::arg("dim") = 40);
    m.def("find_kerr_free_flux", &find_kerr_free_flux, py::arg("params"), py::arg("lo") = 0.30,
          py::arg("hi") = 0.45, py::arg("n_max") = 6);
    m.def(
        "drift_angle",
        [](double a_mag, double t, const TaylorCoefficients& c) { return drift_angle(a_mag, t, effective_static(c)); },
        py::arg("a_mag"), py::arg("t"), py::arg("coeffs"));
    m.def("squeezing_to_db", &squeezing_to_db, py::arg("zeta_mag"));

    m.def(
        "state_wigner",
        [](const std::string& family, int dim, std::complex<double> alpha, std::complex<double> zeta,
           std::complex<double> tau, double gamma, double n_th, double extent, int points) {
            StateParams s;
            s.family = family_from_string(family);
            s.alpha = alpha;
            s.zeta = zeta;
            s.tau = tau;
            s.gamma = gamma;
            s.n_th = n_th;
            const auto w = wigner(make_state(s, dim), WignerGrid{extent, points});
            return py::make_tuple(w.re_axis, w.im_axis, w.values);
        },
        py::arg("family"), py::arg("dim") = 40, py::arg("alpha") = 0.0, py::arg("zeta") = 0.0,
        py::arg("tau") = 0.0, py::arg("gamma") = 0.0, py::arg("n_th") = 0.0, py::arg("extent") = 3.5,
        py::arg("points") = 81, "Wigner map of a state family: (re_axis, im_axis, values[im, re]).");

    m.def(
        "run",
        [](const std::string& subcommand, const std::string& config_path, const std::string& out_dir) {
            std::ostringstream log;
            std::vector<std::string> out;
            for (const auto& f : run(subcommand, load_config(config_path), out_dir, log)) out.push_back(f.string());
            return out;
        },
        py::arg("subcommand"), py::arg("config"), py::arg("out_dir"),
        "Run a subcommand from a config file; returns the written paths, manifest last.");
}
