#include "snail/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace snail {

RootResult brent_root(const std::function<double(double)>& f, double lo, double hi,
                      const RootOptions& opts) {
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return {a, 0.0, 0};
    if (fb == 0.0) return {b, 0.0, 0};
    if (!std::isfinite(fa) || !std::isfinite(fb) || (fa > 0) == (fb > 0)) {
        std::ostringstream msg;
        msg << "brent_root: no sign change on [" << lo << ", " << hi << "] (f=" << fa << ", "
            << fb << ")";
        throw SolverError(msg.str());
    }
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 1; it <= opts.max_iter; ++it) {
        if ((fb > 0) == (fc > 0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol = 2.0 * opts.rtol * std::abs(b) + 0.5 * opts.xtol;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0) return {b, fb, it};
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0) q = -q;
            else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol) ? d : (m > 0 ? tol : -tol);
        fb = f(b);
        if (!std::isfinite(fb)) throw SolverError("brent_root: non-finite function value");
    }
    std::ostringstream msg;
    msg << "brent_root: no convergence after " << opts.max_iter << " iterations, last x=" << b
        << " f=" << fb;
    throw SolverError(msg.str());
}

MinResult golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                             double xtol, int max_iter) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::min(lo, hi), b = std::max(lo, hi);
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    int it = 0;
    while (b - a > xtol && it < max_iter) {
        ++it;
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? MinResult{c, fc, it} : MinResult{d, fd, it};
}

double parabola_vertex(double x1, double y1, double x2, double y2, double x3, double y3) {
    const double num = (x2 - x1) * (x2 - x1) * (y2 - y3) - (x2 - x3) * (x2 - x3) * (y2 - y1);
    const double den = (x2 - x1) * (y2 - y3) - (x2 - x3) * (y2 - y1);
    if (den == 0.0) return x2;
    return x2 - 0.5 * num / den;
}

}  // namespace snail
