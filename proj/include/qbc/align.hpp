#pragma once

#include <functional>
#include <vector>

#include "qbc/channels.hpp"

namespace qbc {

struct AlignOptions {
    bool blockwise = true;
    // Lets the solver double Alice's factor so that optimal contractions
    // can be realized as unitaries on the larger space.
    bool allow_padding = true;
    double tol = 1e-9;
    int max_iter = 500;
    int restarts = 8;
    Seed seed{0x51a7, 0};
    int ellipsoid_iter = 60000;
    // value - lower_bound at or below this counts as converged
    double certify_tol = 1e-7;
};

struct AlignResult {
    std::vector<CMatrix> unitaries;  // one per block (a single one when not blockwise)
    std::vector<int> dim_a;          // dimension each unitary acts on
    double value = 0.0;              // ||(U x 1) V0 - V1|| for the returned U
    double lower_bound = 0.0;        // certified lower bound on the infimum
    bool converged = false;
    bool padded = false;
    int iterations = 0;
};

// Minimizes ||(U x 1_B) V0 - V1|| over (block-diagonal) unitaries U acting
// on Alice's factor. Both dilations must share the input dimension, labels
// and Bob dimensions; Alice factors are zero-padded to a common size.
AlignResult align_isometries(const StinespringDilation& v0, const StinespringDilation& v1,
                             const AlignOptions& opts = {});

// (O_x x 1_B) V for operators O_x: A_x -> A'_x. V is zero-padded when O_x
// has more columns than the block's Alice dimension.
StinespringDilation apply_alice(const StinespringDilation& v, const std::vector<CMatrix>& ops);

// ||(U x 1) V0 - V1|| with both dilations padded to the unitaries' sizes.
double alignment_value(const StinespringDilation& v0, const StinespringDilation& v1,
                       const std::vector<CMatrix>& unitaries);

// Sum over blocks of ||tr_B(V0_x rho V1_x^dag)||_1; every rho gives
// inf_U ||(U x 1) V0 - V1||^2 >= 2 - 2 * value.
double overlap_dual(const StinespringDilation& v0, const StinespringDilation& v1, const CMatrix& rho);

// Unitary [[C, sqrt(1 - C C^dag)], [sqrt(1 - C^dag C), -C^dag]] for a contraction C.
CMatrix halmos_dilation(const CMatrix& c);

struct EllipsoidCut {
    bool feasible = true;
    double value = 0.0;  // objective at the center when feasible
    RVector cut;         // the kept half-space is cut . (z - center) <= 0
};

struct EllipsoidResult {
    RVector best;
    double best_value = 0.0;
    double lower_bound = 0.0;  // valid when the minimizer lies in the start ball
    int iterations = 0;
    bool found_feasible = false;
};

// Central-cut ellipsoid method for convex minimization over a convex set.
// The oracle reports either a feasibility cut or the objective with a
// subgradient at the query point.
EllipsoidResult ellipsoid_minimize(const RVector& center, double radius,
                                   const std::function<EllipsoidCut(const RVector&)>& oracle, int max_iter,
                                   double gap_tol);

}  // namespace qbc
