#pragma once

// Bridges between slt matrices/complex scalars and Eigen dense types.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "slt/matrix.hpp"

namespace slt {

using DenseMatrix = Eigen::MatrixXcd;

inline DenseMatrix to_dense(const Matrix<Complex>& m) {
    DenseMatrix d(m.n(), m.n());
    for (std::size_t i = 0; i < m.n(); ++i)
        for (std::size_t j = 0; j < m.n(); ++j) d(i, j) = m(i, j);
    return d;
}

inline DenseMatrix to_dense(const Matrix<GaussianRational>& m) {
    DenseMatrix d(m.n(), m.n());
    for (std::size_t i = 0; i < m.n(); ++i)
        for (std::size_t j = 0; j < m.n(); ++j) d(i, j) = m(i, j).to_complex();
    return d;
}

inline Matrix<Complex> from_dense(const DenseMatrix& d) {
    Matrix<Complex> m(static_cast<std::size_t>(d.rows()));
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = 0; j < d.cols(); ++j) m(i, j) = d(i, j);
    return m;
}

inline DenseMatrix expm(const DenseMatrix& a) { return a.exp(); }

} // namespace slt
