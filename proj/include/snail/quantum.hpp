#pragma once

// Truncated-Fock states of one bosonic mode, the generalized-squeezing gate
// set plus the cubic phase gate, Wigner functions (displaced-parity
// convention), fidelity and fitting of pure-state families via Wigner overlap.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "snail/operators.hpp"

namespace snail {

class TruncationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Top-level population above which a state is reported as poorly truncated.
inline constexpr double kTruncationWarn = 1e-4;
/// Top-level population above which state construction fails.
inline constexpr double kTruncationFail = 1e-2;

/// Route library warnings (truncation, fit non-convergence). Defaults to stderr.
void set_warning_handler(std::function<void(const std::string&)> handler);
void warn(const std::string& msg);

struct DensityMatrix {
    CMatrix data;

    DensityMatrix() = default;
    explicit DensityMatrix(CMatrix m) : data(std::move(m)) {}
    static DensityMatrix from_ket(const CVector& psi);

    int dim() const { return static_cast<int>(data.rows()); }
    double trace() const { return data.trace().real(); }
    double purity() const;
    double top_occupation() const { return data(dim() - 1, dim() - 1).real(); }
    cdouble mean_a() const;
    double mean_n() const;
};

struct StateDiagnostics {
    double hermiticity = 0.0;     // max |rho - rho^dag|
    double trace_error = 0.0;     // |Tr rho - 1|
    double min_eigenvalue = 0.0;
    double top_occupation = 0.0;
};

StateDiagnostics diagnose(const DensityMatrix& rho);
/// Throws std::runtime_error if an invariant is violated beyond the standard tolerances.
void check_state(const DensityMatrix& rho, const std::string& context);

enum class GateKind { Rotation, Displacement, Squeeze, Trisqueeze, Cubic };

struct GateSpec {
    GateKind kind = GateKind::Rotation;
    cdouble param{};  // theta and gamma are real; alpha, zeta, tau complex

    static GateSpec rotation(double theta) { return {GateKind::Rotation, theta}; }
    static GateSpec displacement(cdouble alpha) { return {GateKind::Displacement, alpha}; }
    static GateSpec squeeze(cdouble zeta) { return {GateKind::Squeeze, zeta}; }
    static GateSpec trisqueeze(cdouble tau) { return {GateKind::Trisqueeze, tau}; }
    static GateSpec cubic(double gamma) { return {GateKind::Cubic, gamma}; }
};

/// Anti-Hermitian generator G with U = exp(G), on `dim` levels.
CMatrix gate_generator(const GateSpec& gate, int dim);
/// Extra levels used while exponentiating so the kept block is faithful.
int gate_padding(const GateSpec& gate, int dim);
/// Matrix exponential of the generator formed on dim + padding levels, truncated to dim.
CMatrix gate_unitary(const GateSpec& gate, int dim);

/// U psi evaluated on a padded space; the weight pushed above `dim` is dropped
/// and reported through `lost` when given.
CVector apply_gate(const CVector& psi, const GateSpec& gate, double* lost = nullptr);
DensityMatrix apply_gate(const DensityMatrix& rho, const GateSpec& gate);

enum class StateFamily { Vacuum, Coherent, Thermal, Squeezed, Trisqueezed, Cubic };

struct StateParams {
    StateFamily family = StateFamily::Vacuum;
    cdouble alpha{};   // coherent amplitude, or residual displacement of the cubic family
    double n_th = 0.0;
    cdouble zeta{};
    cdouble tau{};
    double gamma = 0.0;
};

/// Pure states: vacuum, coherent D(a)|0>, squeezed S(z)|0>, trisqueezed T(t)|0>
/// and the cubic family D(a) C(g) S(z)|0>.
CVector make_ket(const StateParams& s, int dim);
/// Any family, including the thermal (Gibbs) state with mean occupation n_th.
DensityMatrix make_state(const StateParams& s, int dim);

/// Uhlmann fidelity (squared convention), symmetric, in [0, 1].
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
/// <psi|rho|psi>
double fidelity(const DensityMatrix& rho, const CVector& psi);
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

/// 10 log10(exp(2 |zeta|))
double squeezing_to_db(double zeta_mag);

struct WignerGrid {
    double extent = 3.5;  // axes span [-extent, extent] in Re(alpha) and Im(alpha)
    int points = 81;

    std::vector<double> axis() const;
    double spacing() const { return 2.0 * extent / (points - 1); }
};

struct WignerMap {
    std::vector<double> re_axis;
    std::vector<double> im_axis;
    RMatrix values;  // values(i, j) at alpha = re_axis[j] + i im_axis[i]

    double spacing() const;
    /// Riemann sum of W d^2alpha (should be ~1).
    double integral() const;
    double min() const { return values.minCoeff(); }
    double max() const { return values.maxCoeff(); }
};

/// W(alpha) = (2/pi) Tr[rho D(alpha) P D^dag(alpha)], P = (-1)^n.
WignerMap wigner(const DensityMatrix& rho, const WignerGrid& grid = {});
WignerMap wigner(const CVector& psi, const WignerGrid& grid = {});
/// Single-point evaluation by explicit displaced parity (reference path).
double wigner_displaced_parity(const DensityMatrix& rho, cdouble alpha);

/// Normalized pixel overlap sum(W1 W2) / sqrt(sum W1^2 sum W2^2).
double wigner_overlap(const WignerMap& a, const WignerMap& b);

enum class FitFamily { Squeezed, Trisqueezed, Cubic };

struct StateFitResult {
    FitFamily family = FitFamily::Squeezed;
    StateParams params;
    double overlap = 0.0;
    int evaluations = 0;
    bool converged = false;
};

struct StateFitOptions {
    int dim = 60;
    int restarts = 3;
    double spread_tol = 1e-5;
    int max_evaluations = 4000;
};

/// Maximize the normalized Wigner overlap between `map` and the family member
/// over the family parameters (Nelder-Mead with restarts).
StateFitResult fit_state(const WignerMap& map, FitFamily family, const StateParams& guess,
                         const StateFitOptions& opts = {});

struct CubicFidelityResult {
    StateParams params;
    double fidelity = 0.0;
};

/// Closest ideal member D(a)C(g)S(z)|0> to rho, by fidelity.
CubicFidelityResult best_cubic_fidelity(const DensityMatrix& rho, const StateParams& guess,
                                        bool with_displacement = true);

}  // namespace snail
