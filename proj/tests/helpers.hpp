#pragma once

#include "doctest.h"
#include "qbc/numerics.hpp"

namespace qbc::test {

inline double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline CMatrix pauli_x() {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 1) = m(1, 0) = 1.0;
    return m;
}

inline CMatrix pauli_z() {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

inline CMatrix pauli_y() {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 1) = cplx(0, -1);
    m(1, 0) = cplx(0, 1);
    return m;
}

inline CVector ket(std::initializer_list<cplx> v) {
    CVector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (cplx c : v) out(i++) = c;
    return out;
}

// Trace norm of a Hermitian matrix from its spectrum.
inline double hermitian_trace_norm(const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    return es.eigenvalues().cwiseAbs().sum();
}

}  // namespace qbc::test
