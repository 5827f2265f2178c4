#include "snail/quantum.hpp"

#include <cmath>
#include <stdexcept>

#include "snail/circuit.hpp"

namespace snail {

namespace {

int last_significant(const CMatrix& rho, double tol) {
    int m = static_cast<int>(rho.rows());
    while (m > 1) {
        const int k = m - 1;
        if (rho.row(k).cwiseAbs().maxCoeff() > tol || rho.col(k).cwiseAbs().maxCoeff() > tol) break;
        --m;
    }
    return m;
}
}  // namespace

std::vector<double> WignerGrid::axis() const {
    if (points < 2) throw std::invalid_argument("WignerGrid: points >= 2");
    std::vector<double> ax(points);
    for (int i = 0; i < points; ++i) ax[i] = -extent + i * spacing();
    return ax;
}

double WignerMap::spacing() const {
    return re_axis.size() > 1 ? re_axis[1] - re_axis[0] : 1.0;
}

double WignerMap::integral() const {
    const double dre = spacing();
    const double dim = im_axis.size() > 1 ? im_axis[1] - im_axis[0] : 1.0;
    return values.sum() * dre * dim;
}

namespace {

// Laguerre recurrence for W over all grid points at once.
WignerMap wigner_from_matrix(const CMatrix& rho_full, const WignerGrid& grid) {
    const int m_eff = last_significant(rho_full, 1e-15);
    const CMatrix rho = rho_full.topLeftCorner(m_eff, m_eff);
    WignerMap out;
    out.re_axis = grid.axis();
    out.im_axis = out.re_axis;
    const int np = grid.points;
    const Eigen::Index total = static_cast<Eigen::Index>(np) * np;

    Eigen::ArrayXcd a(total);
    for (int i = 0; i < np; ++i)
        for (int j = 0; j < np; ++j) a(i * np + j) = cdouble(out.re_axis[j], out.im_axis[i]);
    const Eigen::ArrayXcd two_a = 2.0 * a;
    const Eigen::ArrayXcd two_ac = two_a.conjugate();

    std::vector<Eigen::ArrayXcd> wl(m_eff, Eigen::ArrayXcd::Zero(total));
    wl[0] = (-2.0 * a.abs2()).exp().cast<cdouble>() / kPi;
    Eigen::ArrayXd w = rho(0, 0).real() * wl[0].real();
    for (int n = 1; n < m_eff; ++n) {
        wl[n] = two_a * wl[n - 1] / std::sqrt(double(n));
        w += 2.0 * (rho(0, n) * wl[n]).real();
    }
    Eigen::ArrayXcd temp(total), temp2(total);
    for (int m = 1; m < m_eff; ++m) {
        const double sm = std::sqrt(double(m));
        temp = wl[m];
        wl[m] = (two_ac * temp - sm * wl[m - 1]) / sm;
        w += (rho(m, m) * wl[m]).real();
        for (int n = m + 1; n < m_eff; ++n) {
            temp2 = (two_a * wl[n - 1] - sm * temp) / std::sqrt(double(n));
            temp = wl[n];
            wl[n] = temp2;
            w += 2.0 * (rho(m, n) * wl[n]).real();
        }
    }
    w *= 2.0;
    out.values = RMatrix(np, np);
    for (int i = 0; i < np; ++i)
        for (int j = 0; j < np; ++j) out.values(i, j) = w(i * np + j);
    return out;
}

}  // namespace

WignerMap wigner(const DensityMatrix& rho, const WignerGrid& grid) {
    return wigner_from_matrix(rho.data, grid);
}

WignerMap wigner(const CVector& psi, const WignerGrid& grid) {
    return wigner_from_matrix(psi * psi.adjoint(), grid);
}

double wigner_displaced_parity(const DensityMatrix& rho, cdouble alpha) {
    const int dim = rho.dim();
    const CMatrix d = gate_unitary(GateSpec::displacement(alpha), dim);
    const CMatrix shifted = d.adjoint() * rho.data * d;
    double parity = 0.0;
    for (int k = 0; k < dim; ++k) parity += (k % 2 ? -1.0 : 1.0) * shifted(k, k).real();
    return 2.0 / kPi * parity;
}

double wigner_overlap(const WignerMap& a, const WignerMap& b) {
    if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols())
        throw std::invalid_argument("wigner_overlap: grid mismatch");
    const double num = (a.values.array() * b.values.array()).sum();
    const double den = std::sqrt(a.values.squaredNorm() * b.values.squaredNorm());
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace snail
