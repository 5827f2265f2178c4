#include "snail/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "snail/operators.hpp"

namespace snail {

double PulseEnvelope::value(double t) const {
    const double total = duration();
    if (t <= 0.0 || t >= total) return 0.0;
    if (rise <= 0.0) return 1.0;
    if (t < rise) return 0.5 * (1.0 - std::cos(kPi * t / rise));
    if (t > rise + hold) return 0.5 * (1.0 - std::cos(kPi * (total - t) / rise));
    return 1.0;
}

void PulseEnvelope::validate() const {
    if (!(rise >= 0.0) || !(hold >= 0.0)) throw std::invalid_argument("PulseEnvelope: rise >= 0 and hold >= 0");
    if (duration() <= 0.0) throw std::invalid_argument("PulseEnvelope: duration > 0");
}

PulseEnvelope PulseEnvelope::with_duration(double total, double rise) {
    if (total < 2.0 * rise) rise = 0.5 * total;
    return {rise, total - 2.0 * rise};
}

void DriveSpec::validate() const {
    if (harmonic < 1 || harmonic > 3) throw std::invalid_argument("DriveSpec: harmonic in {1, 2, 3}");
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw std::invalid_argument("DriveSpec: amplitude >= 0");
    if (!std::isfinite(phase) || !std::isfinite(delay)) throw std::invalid_argument("DriveSpec: finite phase and delay");
    envelope.validate();
}

NoiseModel NoiseModel::from_t2_star(double t1, double t2_star, double n_th) {
    const double rate = 1.0 / t2_star - 1.0 / (2.0 * t1);
    if (!(rate > 0.0)) throw std::invalid_argument("NoiseModel: t_phi > 0 requires T2* < 2 T1");
    NoiseModel m{t1, 1.0 / rate, n_th};
    m.validate();
    return m;
}

void NoiseModel::validate() const {
    if (!(t1 > 0.0)) throw std::invalid_argument("NoiseModel: t1 > 0");
    if (!(t_phi > 0.0)) throw std::invalid_argument("NoiseModel: t_phi > 0");
    if (!(n_th >= 0.0 && n_th < 1.0)) throw std::invalid_argument("NoiseModel: 0 <= n_th < 1");
}

bool NoiseModel::has_dissipation() const { return std::isfinite(t1) || std::isfinite(t_phi); }

NoiseModel device_noise() { return NoiseModel::from_t2_star(28e-6, 2.80e-6, 0.024); }

double default_max_step(double omega0) { return kTwoPi / (50.0 * 3.0 * omega0); }

void SimulationConfig::validate() const {
    if (dim < 2) throw std::invalid_argument("SimulationConfig: dim >= 2");
    if (coeffs.n_max() < 3 || coeffs.g_ac.size() != coeffs.g_dc.size())
        throw std::invalid_argument("SimulationConfig: coefficients must be populated");
    if (!(coeffs.omega0 > 0.0)) throw std::invalid_argument("SimulationConfig: omega0 > 0");
    for (const auto& d : drives) d.validate();
    if (noise) noise->validate();
    if (t_grid.empty()) throw std::invalid_argument("SimulationConfig: t_grid must not be empty");
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        if (t_grid[k] < 0.0) throw std::invalid_argument("SimulationConfig: t_grid >= 0");
        if (k && t_grid[k] < t_grid[k - 1]) throw std::invalid_argument("SimulationConfig: t_grid non-decreasing");
    }
    if (!(integrator.rtol > 0.0) || !(integrator.atol > 0.0))
        throw std::invalid_argument("IntegratorOptions: rtol > 0 and atol > 0");
}

TaylorCoefficients truncate_order(const TaylorCoefficients& c, int order) {
    TaylorCoefficients out = c;
    for (int n = order + 1; n <= c.n_max(); ++n) {
        out.g_dc[n] = 0.0;
        out.g_ac[n] = 0.0;
    }
    return out;
}

namespace {

// Scalar coefficient of (a + a^dag)^n at time t (lab frame, without omega0 n).
std::vector<double> term_coefficients(double t, const SimulationConfig& cfg) {
    const auto& c = cfg.coeffs;
    std::vector<double> out(c.n_max() + 1, 0.0);
    for (int n = 1; n <= c.n_max(); ++n) out[n] = c.g_dc[n];
    for (const auto& d : cfg.drives) {
        const double tau = t - d.delay;
        const double f = d.envelope.value(tau);
        if (f == 0.0 || d.amplitude == 0.0) continue;
        const double carrier = std::cos(d.harmonic * c.omega0 * tau + d.phase);
        const double s = d.amplitude * f * carrier;
        if (d.line == DriveLine::Charge) {
            out[1] += s;
        } else {
            for (int n = 1; n <= c.n_max(); ++n) out[n] += c.g_ac[n] * s;
        }
    }
    return out;
}

// Banded generator of the rotating-frame dynamics.
class BandedModel {
public:
    explicit BandedModel(const SimulationConfig& cfg)
        : cfg_(cfg), dim_(cfg.dim), nmax_(cfg.coeffs.n_max()), band_(nmax_) {
        // xband_[n][d + band][j] = X^n(j, j + d)
        xband_.assign(nmax_ + 1, std::vector<RVector>(2 * band_ + 1));
        for (int n = 1; n <= nmax_; ++n) {
            const RMatrix xn = quadrature_power(dim_, n);
            for (int d = -band_; d <= band_; ++d) {
                RVector v = RVector::Zero(dim_);
                for (int j = 0; j < dim_; ++j) {
                    const int k = j + d;
                    if (k >= 0 && k < dim_) v(j) = xn(j, k);
                }
                xband_[n][d + band_] = v;
            }
        }
        h_.assign(2 * band_ + 1, CVector::Zero(dim_));
        // drives with nothing to do are dropped once
        for (const auto& d : cfg.drives)
            if (d.amplitude != 0.0) active_.push_back(d);
    }

    int band() const { return band_; }
    int dim() const { return dim_; }

    // h_[d + band](j) = H_I(j, j + d) at time t
    void build(double t) {
        coef_.assign(nmax_ + 1, 0.0);
        const auto& c = cfg_.coeffs;
        for (int n = 1; n <= nmax_; ++n) coef_[n] = c.g_dc[n];
        for (const auto& d : active_) {
            const double tau = t - d.delay;
            const double f = d.envelope.value(tau);
            if (f == 0.0) continue;
            const double s = d.amplitude * f * std::cos(d.harmonic * c.omega0 * tau + d.phase);
            if (d.line == DriveLine::Charge) {
                coef_[1] += s;
            } else {
                for (int n = 1; n <= nmax_; ++n) coef_[n] += c.g_ac[n] * s;
            }
        }
        for (int d = -band_; d <= band_; ++d) {
            CVector& hd = h_[d + band_];
            hd.setZero();
            for (int n = std::max(1, std::abs(d)); n <= nmax_; n += 1) {
                if (((n - d) & 1) != 0 || coef_[n] == 0.0) continue;
                hd.real() += coef_[n] * xband_[n][d + band_];
            }
            if (d != 0) hd *= std::polar(1.0, -c.omega0 * d * t);
        }
    }

    // out = -i H psi
    void apply_ket(const CVector& psi, CVector& out) const {
        out.setZero();
        for (int d = -band_; d <= band_; ++d) {
            const int j0 = std::max(0, -d), len = dim_ - std::abs(d);
            if (len <= 0) continue;
            out.segment(j0, len).array() += h_[d + band_].segment(j0, len).array() * psi.segment(j0 + d, len).array();
        }
        out *= cdouble(0.0, -1.0);
    }

    // out = H rho
    void apply_left(const CMatrix& rho, CMatrix& out) const {
        out.setZero();
        for (int d = -band_; d <= band_; ++d) {
            const int j0 = std::max(0, -d), len = dim_ - std::abs(d);
            if (len <= 0) continue;
            out.middleRows(j0, len).noalias() +=
                h_[d + band_].segment(j0, len).asDiagonal() * rho.middleRows(j0 + d, len);
        }
    }

private:
    const SimulationConfig& cfg_;
    int dim_, nmax_, band_;
    std::vector<std::vector<RVector>> xband_;
    std::vector<CVector> h_;
    std::vector<double> coef_;
    std::vector<DriveSpec> active_;
};

class Dissipator {
public:
    Dissipator(const NoiseModel& m, int dim) : dim_(dim) {
        down_ = std::isfinite(m.t1) ? (1.0 + m.n_th) / m.t1 : 0.0;
        up_ = std::isfinite(m.t1) ? m.n_th / m.t1 : 0.0;
        dephase_ = std::isfinite(m.t_phi) ? 2.0 / m.t_phi : 0.0;
        // per-element decay of the anticommutator and dephasing parts
        decay_ = RMatrix(dim, dim);
        for (int k = 0; k < dim; ++k)
            for (int j = 0; j < dim; ++j) {
                const double aad_j = j < dim - 1 ? j + 1.0 : 0.0;
                const double aad_k = k < dim - 1 ? k + 1.0 : 0.0;
                decay_(j, k) = 0.5 * down_ * (j + k) + 0.5 * up_ * (aad_j + aad_k) +
                               0.5 * dephase_ * double(j - k) * double(j - k);
            }
        sq_ = RVector(dim);
        for (int j = 0; j < dim; ++j) sq_(j) = std::sqrt(double(j));
    }

    // out += D rho
    void add(const CMatrix& rho, CMatrix& out) const {
        out.array() -= decay_.array() * rho.array();
        const int m = dim_ - 1;
        if (down_ != 0.0) {
            // (a rho a^dag)(j, k) = sqrt(j+1) sqrt(k+1) rho(j+1, k+1)
            out.topLeftCorner(m, m).array() +=
                down_ * (sq_.tail(m) * sq_.tail(m).transpose()).array() * rho.bottomRightCorner(m, m).array();
        }
        if (up_ != 0.0) {
            out.bottomRightCorner(m, m).array() +=
                up_ * (sq_.tail(m) * sq_.tail(m).transpose()).array() * rho.topLeftCorner(m, m).array();
        }
    }

private:
    int dim_;
    double down_ = 0.0, up_ = 0.0, dephase_ = 0.0;
    RMatrix decay_;
    RVector sq_;
};

// Dormand-Prince 5(4) with the standard PI-free controller.
template <class State, class Rhs>
class DormandPrince {
public:
    DormandPrince(Rhs rhs, const IntegratorOptions& opts, double max_step)
        : rhs_(std::move(rhs)), opts_(opts), hmax_(max_step) {}

    long steps = 0;
    long evaluations = 0;

    void advance(State& y, double& t, double t_end) {
        if (t_end <= t) return;
        if (!have_k1_) {
            k1_ = y;
            rhs_(t, y, k1_);
            ++evaluations;
            have_k1_ = true;
        }
        if (h_ <= 0.0) h_ = std::min(hmax_, 1e-12);
        while (t < t_end) {
            double h = std::min({h_, hmax_, t_end - t});
            const bool last = (t + h >= t_end);
            if (last) h = t_end - t;
            if (h < opts_.min_step && !last) {
                std::ostringstream msg;
                msg << "evolve: step size underflow (h = " << h << " s) at t = " << t << " s";
                throw IntegrationError(msg.str(), t);
            }
            if (++steps > opts_.max_steps) throw IntegrationError("evolve: step budget exhausted", t);
            step(y, t, h);
            const double err = error_norm(y);
            if (!std::isfinite(err)) throw IntegrationError("evolve: non-finite state", t);
            if (err <= 1.0) {
                t = last ? t_end : t + h;
                y = y5_;
                k1_ = k7_;  // first-same-as-last
                const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                if (!last || fac < 1.0) h_ = h * fac;
            } else {
                h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
            }
        }
    }

private:
    void step(const State& y, double t, double h) {
        static constexpr double a21 = 1.0 / 5, a31 = 3.0 / 40, a32 = 9.0 / 40, a41 = 44.0 / 45,
                                a42 = -56.0 / 15, a43 = 32.0 / 9, a51 = 19372.0 / 6561,
                                a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729,
                                a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656, b1 = 35.0 / 384,
                                b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
        tmp_ = y + h * (a21 * k1_);
        rhs_(t + h / 5, tmp_, k2_);
        tmp_ = y + h * (a31 * k1_ + a32 * k2_);
        rhs_(t + 3 * h / 10, tmp_, k3_);
        tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        rhs_(t + 4 * h / 5, tmp_, k4_);
        tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        rhs_(t + 8 * h / 9, tmp_, k5_);
        tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        rhs_(t + h, tmp_, k6_);
        y5_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
        rhs_(t + h, y5_, k7_);
        evaluations += 6;
        err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
    }

    double error_norm(const State& y) const {
        const auto scale = (opts_.atol + opts_.rtol * y.cwiseAbs().cwiseMax(y5_.cwiseAbs()).array());
        const double n = static_cast<double>(y.size());
        return std::sqrt((err_.cwiseAbs().array() / scale).square().sum() / n);
    }

    Rhs rhs_;
    IntegratorOptions opts_;
    double hmax_;
    double h_ = 0.0;
    bool have_k1_ = false;
    State k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y5_, err_;
};

constexpr double kKetNormDefect = 1e-6;

double resolve_max_step(const SimulationConfig& cfg) {
    return cfg.integrator.max_step > 0.0 ? cfg.integrator.max_step : default_max_step(cfg.coeffs.omega0);
}

void record(Trajectory& tr, double t, DensityMatrix rho) {
    tr.times.push_back(t);
    tr.mean_a.push_back(rho.mean_a());
    tr.mean_n.push_back(rho.mean_n());
    tr.purity.push_back(rho.purity());
    tr.states.push_back(std::move(rho));
}

void check_sample(const DensityMatrix& rho, double t) {
    try {
        std::ostringstream ctx;
        ctx << "evolve at t = " << t << " s";
        check_state(rho, ctx.str());
    } catch (const std::runtime_error& e) {
        throw IntegrationError(e.what(), t);
    }
}

}  // namespace

CMatrix hamiltonian_at(double t, const SimulationConfig& cfg) {
    const int dim = cfg.dim;
    const auto coef = term_coefficients(t, cfg);
    RMatrix h = RMatrix::Zero(dim, dim);
    for (int j = 0; j < dim; ++j) h(j, j) = cfg.coeffs.omega0 * j;
    for (int n = 1; n < static_cast<int>(coef.size()); ++n)
        if (coef[n] != 0.0) h += coef[n] * quadrature_power(dim, n);
    return h.cast<cdouble>();
}

std::vector<CVector> evolve_ket(const SimulationConfig& cfg, const CVector& psi0) {
    cfg.validate();
    if (psi0.size() != cfg.dim) throw std::invalid_argument("evolve_ket: initial state has wrong dimension");
    BandedModel model(cfg);
    auto rhs = [&model](double t, const CVector& y, CVector& dy) {
        model.build(t);
        dy.resize(y.size());
        model.apply_ket(y, dy);
    };
    DormandPrince<CVector, decltype(rhs)> dp(rhs, cfg.integrator, resolve_max_step(cfg));
    std::vector<CVector> out;
    CVector y = psi0;
    double t = 0.0;
    for (double ts : cfg.t_grid) {
        dp.advance(y, t, ts);
        // Runge-Kutta steps are not exactly unitary; the accumulated defect is
        // an accuracy measure, checked and then removed at each sample.
        const double drift = std::abs(y.squaredNorm() - 1.0);
        if (drift > kKetNormDefect) {
            std::ostringstream msg;
            msg << "evolve: norm defect " << drift << " exceeds " << kKetNormDefect
                << "; tighten rtol or max_step";
            throw IntegrationError(msg.str(), t);
        }
        out.push_back(y / y.norm());
    }
    return out;
}

Trajectory evolve(const SimulationConfig& cfg) {
    cfg.validate();
    Trajectory tr;
    const bool dissipative = cfg.noise && cfg.noise->has_dissipation();

    if (!dissipative) {
        // Pure-state path; a thermal initial state is a mixture of Fock kets.
        std::vector<std::pair<double, CVector>> parts;
        if (cfg.initial.family == StateFamily::Thermal) {
            const auto rho0 = make_state(cfg.initial, cfg.dim);
            double kept = 0.0;
            for (int k = 0; k < cfg.dim; ++k) {
                const double p = rho0.data(k, k).real();
                if (p < 1e-12) continue;
                CVector e = CVector::Zero(cfg.dim);
                e(k) = 1.0;
                parts.emplace_back(p, e);
                kept += p;
            }
            for (auto& pr : parts) pr.first /= kept;
        } else {
            parts.emplace_back(1.0, make_ket(cfg.initial, cfg.dim));
        }
        std::vector<CMatrix> acc(cfg.t_grid.size(), CMatrix::Zero(cfg.dim, cfg.dim));
        for (const auto& [w, psi] : parts) {
            const auto kets = evolve_ket(cfg, psi);
            for (std::size_t k = 0; k < kets.size(); ++k) acc[k] += w * kets[k] * kets[k].adjoint();
        }
        for (std::size_t k = 0; k < acc.size(); ++k) {
            DensityMatrix rho(std::move(acc[k]));
            check_sample(rho, cfg.t_grid[k]);
            record(tr, cfg.t_grid[k], std::move(rho));
        }
        return tr;
    }

    BandedModel model(cfg);
    Dissipator diss(*cfg.noise, cfg.dim);
    CMatrix hr(cfg.dim, cfg.dim);
    auto rhs = [&](double t, const CMatrix& rho, CMatrix& drho) {
        model.build(t);
        model.apply_left(rho, hr);
        // -i [H, rho] = -i (H rho - (H rho)^dag) for Hermitian H and rho
        drho = cdouble(0.0, -1.0) * hr + cdouble(0.0, 1.0) * hr.adjoint();
        diss.add(rho, drho);
    };
    DormandPrince<CMatrix, decltype(rhs)> dp(rhs, cfg.integrator, resolve_max_step(cfg));
    CMatrix y = make_state(cfg.initial, cfg.dim).data;
    double t = 0.0;
    for (double ts : cfg.t_grid) {
        dp.advance(y, t, ts);
        DensityMatrix rho(0.5 * (y + y.adjoint()));
        check_sample(rho, ts);
        record(tr, ts, std::move(rho));
    }
    tr.steps = dp.steps;
    tr.rhs_evaluations = dp.evaluations;
    return tr;
}

}  // namespace snail
