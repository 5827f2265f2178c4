#include "snail/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "snail/circuit.hpp"
#include "snail/simplex.hpp"

namespace snail {

namespace {

using SpMat = Eigen::SparseMatrix<cdouble>;

thread_local bool quiet_warnings = false;

std::function<void(const std::string&)>& warning_handler() {
    static std::function<void(const std::string&)> h = [](const std::string& m) {
        std::cerr << "warning: " << m << '\n';
    };
    return h;
}

// Generator on `dim` levels as a sparse matrix.
SpMat sparse_generator(const GateSpec& g, int dim) {
    std::vector<Eigen::Triplet<cdouble>> t;
    const cdouble p = g.param;
    switch (g.kind) {
        case GateKind::Rotation:
            for (int j = 0; j < dim; ++j) t.emplace_back(j, j, cdouble(0, -p.real() * j));
            break;
        case GateKind::Displacement:
            // alpha a^dag - alpha* a
            for (int j = 1; j < dim; ++j) {
                const double s = std::sqrt(double(j));
                t.emplace_back(j, j - 1, p * s);
                t.emplace_back(j - 1, j, -std::conj(p) * s);
            }
            break;
        case GateKind::Squeeze:
            // (zeta* a^2 - zeta a^dag^2) / 2, so real zeta > 0 squeezes x
            for (int j = 2; j < dim; ++j) {
                const double s = std::sqrt(double(j) * (j - 1));
                t.emplace_back(j, j - 2, -0.5 * p * s);
                t.emplace_back(j - 2, j, 0.5 * std::conj(p) * s);
            }
            break;
        case GateKind::Trisqueeze:
            // tau a^dag^3 - tau* a^3
            for (int j = 3; j < dim; ++j) {
                const double s = std::sqrt(double(j) * (j - 1) * (j - 2));
                t.emplace_back(j, j - 3, p * s);
                t.emplace_back(j - 3, j, -std::conj(p) * s);
            }
            break;
        case GateKind::Cubic: {
            // i gamma ((a + a^dag)/sqrt 2)^3
            const RMatrix x3 = quadrature_power(dim, 3);
            const cdouble c(0.0, p.real() / (2.0 * std::sqrt(2.0)));
            for (int i = 0; i < dim; ++i)
                for (int j = std::max(0, i - 3); j <= std::min(dim - 1, i + 3); ++j)
                    if (x3(i, j) != 0.0) t.emplace_back(i, j, c * x3(i, j));
            break;
        }
    }
    SpMat m(dim, dim);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

double one_norm(const SpMat& m) {
    double best = 0.0;
    for (int k = 0; k < m.outerSize(); ++k) {
        double s = 0.0;
        for (SpMat::InnerIterator it(m, k); it; ++it) s += std::abs(it.value());
        best = std::max(best, s);
    }
    return best;
}

// exp(G) v by a Taylor series on sub-steps of unit norm.
CVector expm_multiply(const SpMat& g, CVector v) {
    const double norm = one_norm(g);
    const int steps = std::max(1, static_cast<int>(std::ceil(norm)));
    const SpMat gs = g / static_cast<double>(steps);
    for (int s = 0; s < steps; ++s) {
        CVector term = v, acc = v;
        for (int k = 1; k < 60; ++k) {
            term = (gs * term) / static_cast<double>(k);
            acc += term;
            if (term.norm() <= 1e-17 * acc.norm()) break;
        }
        v = std::move(acc);
    }
    return v;
}

CMatrix dense_expm_antihermitian(const CMatrix& g) {
    // G anti-Hermitian: G = i H, exp(G) = V exp(i lambda) V^dag.
    const CMatrix h = cdouble(0, -1) * g;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
    const CVector phases = (cdouble(0, 1) * es.eigenvalues().cast<cdouble>()).array().exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}


}  // namespace

void set_warning_handler(std::function<void(const std::string&)> handler) {
    warning_handler() = std::move(handler);
}

void warn(const std::string& msg) {
    if (!quiet_warnings && warning_handler()) warning_handler()(msg);
}

DensityMatrix DensityMatrix::from_ket(const CVector& psi) {
    return DensityMatrix(psi * psi.adjoint());
}

double DensityMatrix::purity() const { return (data * data).trace().real(); }

cdouble DensityMatrix::mean_a() const {
    cdouble s = 0.0;
    for (int j = 1; j < dim(); ++j) s += std::sqrt(double(j)) * data(j, j - 1);
    return s;
}

double DensityMatrix::mean_n() const {
    double s = 0.0;
    for (int j = 1; j < dim(); ++j) s += j * data(j, j).real();
    return s;
}

StateDiagnostics diagnose(const DensityMatrix& rho) {
    StateDiagnostics d;
    d.hermiticity = (rho.data - rho.data.adjoint()).cwiseAbs().maxCoeff();
    d.trace_error = std::abs(rho.trace() - 1.0);
    const CMatrix h = 0.5 * (rho.data + rho.data.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    d.top_occupation = rho.top_occupation();
    return d;
}

void check_state(const DensityMatrix& rho, const std::string& context) {
    const auto d = diagnose(rho);
    std::ostringstream msg;
    if (d.hermiticity > 1e-10) msg << " hermiticity " << d.hermiticity << " > 1e-10;";
    if (d.trace_error > 1e-8) msg << " trace error " << d.trace_error << " > 1e-8;";
    if (d.min_eigenvalue < -1e-8) msg << " min eigenvalue " << d.min_eigenvalue << " < -1e-8;";
    if (!msg.str().empty()) throw std::runtime_error(context + ": state invariant violated:" + msg.str());
    if (d.top_occupation > kTruncationWarn) {
        std::ostringstream w;
        w << context << ": top Fock level holds " << d.top_occupation << " (truncation)";
        warn(w.str());
    }
}

CMatrix gate_generator(const GateSpec& gate, int dim) {
    return CMatrix(sparse_generator(gate, dim));
}

int gate_padding(const GateSpec& gate, int dim) {
    if (gate.kind == GateKind::Rotation) return 0;
    return std::max(20, dim / 2);
}

CMatrix gate_unitary(const GateSpec& gate, int dim) {
    const int pad = gate_padding(gate, dim);
    const CMatrix u = dense_expm_antihermitian(gate_generator(gate, dim + pad));
    return u.topLeftCorner(dim, dim);
}

CVector apply_gate(const CVector& psi, const GateSpec& gate, double* lost) {
    const int dim = static_cast<int>(psi.size());
    const int pad = gate_padding(gate, dim);
    CVector big = CVector::Zero(dim + pad);
    big.head(dim) = psi;
    big = expm_multiply(sparse_generator(gate, dim + pad), std::move(big));
    if (lost) *lost = big.tail(pad).squaredNorm();
    return big.head(dim);
}

DensityMatrix apply_gate(const DensityMatrix& rho, const GateSpec& gate) {
    const int dim = rho.dim();
    const CMatrix u = gate_unitary(gate, dim);
    DensityMatrix out(u * rho.data * u.adjoint());
    const double lost = rho.trace() - out.trace();
    if (lost > kTruncationWarn) {
        std::ostringstream w;
        w << "apply_gate: " << lost << " of the population left the truncated space";
        warn(w.str());
    }
    return out;
}

CVector make_ket(const StateParams& s, int dim) {
    if (dim < 2) throw std::invalid_argument("make_ket: dim >= 2");
    CVector psi = CVector::Zero(dim);
    psi(0) = 1.0;
    double lost = 0.0, total_lost = 0.0;
    auto step = [&](const GateSpec& g) {
        psi = apply_gate(psi, g, &lost);
        total_lost += lost;
    };
    switch (s.family) {
        case StateFamily::Vacuum:
            break;
        case StateFamily::Coherent:
            step(GateSpec::displacement(s.alpha));
            break;
        case StateFamily::Squeezed:
            step(GateSpec::squeeze(s.zeta));
            break;
        case StateFamily::Trisqueezed:
            step(GateSpec::trisqueeze(s.tau));
            break;
        case StateFamily::Cubic:
            step(GateSpec::squeeze(s.zeta));
            step(GateSpec::cubic(s.gamma));
            step(GateSpec::displacement(s.alpha));
            break;
        case StateFamily::Thermal:
            throw std::invalid_argument("make_ket: thermal state is mixed");
    }
    const double top = std::norm(psi(dim - 1));
    const double leak = std::max(top, total_lost);
    if (leak > kTruncationFail) {
        std::ostringstream msg;
        msg << "make_ket: truncation at dim=" << dim << " loses " << leak << " (> 1e-2)";
        throw TruncationError(msg.str());
    }
    if (leak > kTruncationWarn) {
        std::ostringstream w;
        w << "make_ket: truncation at dim=" << dim << " loses " << leak;
        warn(w.str());
    }
    return psi / psi.norm();
}

DensityMatrix make_state(const StateParams& s, int dim) {
    if (s.family != StateFamily::Thermal) return DensityMatrix::from_ket(make_ket(s, dim));
    if (s.n_th < 0.0) throw std::invalid_argument("make_state: n_th >= 0");
    CMatrix rho = CMatrix::Zero(dim, dim);
    if (s.n_th == 0.0) {
        rho(0, 0) = 1.0;
        return DensityMatrix(rho);
    }
    const double q = s.n_th / (1.0 + s.n_th);
    double p = 1.0 / (1.0 + s.n_th), total = 0.0;
    for (int k = 0; k < dim; ++k, p *= q) {
        rho(k, k) = p;
        total += p;
    }
    if (rho(dim - 1, dim - 1).real() > kTruncationFail)
        throw TruncationError("make_state: thermal occupation too large for dim");
    rho /= total;
    return DensityMatrix(rho);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
    // Eigenvalues at rounding level would add ~1e-8 each after the square root.
    auto root = [](const RVector& ev) {
        const double floor = 1e-14 * std::max(ev.maxCoeff(), 0.0);
        return ev.unaryExpr([floor](double x) { return x > floor ? std::sqrt(x) : 0.0; }).eval();
    };
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (rho.data + rho.data.adjoint()));
    const RVector ev = root(es.eigenvalues());
    const CMatrix sq = es.eigenvectors() * ev.cast<cdouble>().asDiagonal() * es.eigenvectors().adjoint();
    const CMatrix m = sq * sigma.data * sq;
    Eigen::SelfAdjointEigenSolver<CMatrix> es2(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    const double s = root(es2.eigenvalues()).sum();
    return std::clamp(s * s, 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const CVector& psi) {
    return std::clamp((psi.adjoint() * rho.data * psi)(0, 0).real(), 0.0, 1.0);
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    const CMatrix d = rho.data - sigma.data;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double squeezing_to_db(double zeta_mag) {
    if (zeta_mag < 0.0) throw std::invalid_argument("squeezing_to_db: zeta_mag >= 0");
    return 10.0 * std::log10(std::exp(2.0 * zeta_mag));
}

// ---------------------------------------------------------------------------
// Family fits

namespace {

std::vector<double> pack(FitFamily f, const StateParams& s) {
    switch (f) {
        case FitFamily::Squeezed:
            return {s.zeta.real(), s.zeta.imag()};
        case FitFamily::Trisqueezed:
            return {s.tau.real(), s.tau.imag()};
        case FitFamily::Cubic:
            return {s.zeta.real(), s.zeta.imag(), s.gamma, s.alpha.real(), s.alpha.imag()};
    }
    return {};
}

StateParams unpack(FitFamily f, const std::vector<double>& x) {
    StateParams s;
    switch (f) {
        case FitFamily::Squeezed:
            s.family = StateFamily::Squeezed;
            s.zeta = {x[0], x[1]};
            break;
        case FitFamily::Trisqueezed:
            s.family = StateFamily::Trisqueezed;
            s.tau = {x[0], x[1]};
            break;
        case FitFamily::Cubic:
            s.family = StateFamily::Cubic;
            s.zeta = {x[0], x[1]};
            s.gamma = x[2];
            s.alpha = {x[3], x[4]};
            break;
    }
    return s;
}

// Quiet ket construction for optimizer probes: out-of-range parameters just
// score badly instead of raising.
std::optional<CVector> probe_ket(const StateParams& s, int dim) {
    quiet_warnings = true;
    std::optional<CVector> out;
    try {
        out = make_ket(s, dim);
    } catch (const TruncationError&) {
    }
    quiet_warnings = false;
    return out;
}

std::vector<double> restart_offsets(int restart, std::size_t n, double scale) {
    // deterministic perturbation pattern per restart
    std::vector<double> d(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double sign = ((k + restart) % 2 == 0) ? 1.0 : -1.0;
        d[k] = sign * scale * (1.0 + 0.5 * ((k * 7 + restart * 3) % 5) / 4.0);
    }
    return d;
}

}  // namespace

StateFitResult fit_state(const WignerMap& map, FitFamily family, const StateParams& guess,
                         const StateFitOptions& opts) {
    const int np = static_cast<int>(map.re_axis.size());
    WignerGrid grid{map.re_axis.back(), np};
    const double meas_norm = map.values.norm();
    if (meas_norm == 0.0) throw std::invalid_argument("fit_state: empty Wigner map");

    int evals = 0;
    auto cost = [&](const std::vector<double>& x) {
        ++evals;
        const auto ket = probe_ket(unpack(family, x), opts.dim);
        if (!ket) return 2.0;
        const auto model = wigner(*ket, grid);
        return 1.0 - wigner_overlap(map, model);
    };

    SimplexOptions so;
    so.spread_tol = opts.spread_tol;
    so.max_evaluations = opts.max_evaluations;
    so.value_tol = 1e-14;
    std::vector<double> best = pack(family, guess);
    so.initial_step.assign(best.size(), 0.05);
    auto res = nelder_mead(cost, best, so);
    bool converged = res.converged;
    for (int r = 0; r < opts.restarts; ++r) {
        std::vector<double> x0 = res.x;
        const auto d = restart_offsets(r, x0.size(), 0.02);
        for (std::size_t k = 0; k < x0.size(); ++k) x0[k] += d[k];
        auto again = nelder_mead(cost, x0, so);
        if (again.value < res.value) {
            converged = again.converged;
            res = std::move(again);
        }
    }
    if (!converged) warn("fit_state: simplex did not converge; returning best iterate");

    StateFitResult out;
    out.family = family;
    out.params = unpack(family, res.x);
    out.overlap = 1.0 - res.value;
    out.evaluations = evals;
    out.converged = converged;
    return out;
}

CubicFidelityResult best_cubic_fidelity(const DensityMatrix& rho, const StateParams& guess,
                                        bool with_displacement) {
    const int dim = rho.dim();
    auto unpack_c = [&](const std::vector<double>& x) {
        StateParams s;
        s.family = StateFamily::Cubic;
        s.zeta = {x[0], x[1]};
        s.gamma = x[2];
        if (with_displacement) s.alpha = {x[3], x[4]};
        return s;
    };
    auto cost = [&](const std::vector<double>& x) {
        const auto ket = probe_ket(unpack_c(x), dim);
        if (!ket) return 2.0;
        return 1.0 - fidelity(rho, *ket);
    };
    std::vector<double> x0 = {guess.zeta.real(), guess.zeta.imag(), guess.gamma};
    if (with_displacement) {
        x0.push_back(guess.alpha.real());
        x0.push_back(guess.alpha.imag());
    }
    SimplexOptions so;
    so.initial_step.assign(x0.size(), 0.03);
    so.spread_tol = 1e-6;
    so.value_tol = 1e-14;
    so.max_evaluations = 4000;
    auto res = nelder_mead(cost, x0, so);
    for (int r = 0; r < 2; ++r) {
        auto x1 = res.x;
        const auto d = restart_offsets(r, x1.size(), 0.01);
        for (std::size_t k = 0; k < x1.size(); ++k) x1[k] += d[k];
        auto again = nelder_mead(cost, x1, so);
        if (again.value < res.value) res = std::move(again);
    }
    return {unpack_c(res.x), 1.0 - res.value};
}

}  // namespace snail
