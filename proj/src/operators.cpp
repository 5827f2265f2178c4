#include "snail/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace snail {

LadderOperators ladder_operators(int dim) {
    if (dim < 2) throw std::invalid_argument("ladder_operators: dim >= 2");
    LadderOperators ops;
    ops.a = RMatrix::Zero(dim, dim);
    for (int j = 1; j < dim; ++j) ops.a(j - 1, j) = std::sqrt(static_cast<double>(j));
    ops.a_dagger = ops.a.transpose();
    ops.n = ops.a_dagger * ops.a;
    return ops;
}

RMatrix quadrature_power(int dim, int k) {
    if (k < 0) throw std::invalid_argument("quadrature_power: k >= 0");
    if (k == 0) return RMatrix::Identity(dim, dim);
    const int big = dim + k;
    const auto ops = ladder_operators(big);
    const RMatrix x = ops.a + ops.a_dagger;
    RMatrix p = x;
    for (int i = 1; i < k; ++i) p = p * x;
    return p.topLeftCorner(dim, dim);
}

}  // namespace snail
