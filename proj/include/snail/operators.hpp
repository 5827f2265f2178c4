#pragma once

// Truncated-Fock matrices for a single bosonic mode.

#include <complex>

#include <Eigen/Dense>

namespace snail {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

struct LadderOperators {
    RMatrix a;         // a(j-1, j) = sqrt(j)
    RMatrix a_dagger;
    RMatrix n;         // diag(0, 1, ..., dim-1)
};

LadderOperators ladder_operators(int dim);

/// (a + a^dag)^k with exact matrix elements on the kept levels: the power is
/// formed in a space padded by k levels and then truncated.
RMatrix quadrature_power(int dim, int k);

}  // namespace snail
