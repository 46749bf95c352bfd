#pragma once

#include <functional>

#include "qbc/numerics.hpp"

namespace qbc {

struct SimplexResult {
    RVector x;
    double value = 0.0;
    int evaluations = 0;
};

// Derivative-free local minimization (Nelder-Mead with standard
// coefficients). Stops when the simplex values agree within ftol or the
// evaluation budget is spent.
SimplexResult nelder_mead(const std::function<double(const RVector&)>& f, const RVector& x0, double step,
                          int max_evals, double ftol);

// exp(i H) for the Hermitian matrix H whose real coordinates are z
// (diagonal entries, then real and imaginary parts above the diagonal).
CMatrix unitary_from_coords(const RVector& z, int d);

}  // namespace qbc
