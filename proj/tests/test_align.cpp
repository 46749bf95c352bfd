#include <cmath>

#include "helpers.hpp"
#include "qbc/align.hpp"
#include "qbc/optimize.hpp"

using namespace qbc;
using namespace qbc::test;

namespace {

StinespringDilation random_dilation(int dim_a, int dim_b, int in, Rng& rng) {
    StinespringDilation d;
    d.v = random_isometry(dim_a * dim_b, in, rng);
    d.blocks = {DilationBlock{{}, dim_a, dim_b}};
    return d;
}

// Brute-force alignment oracle for a 2-dimensional Alice factor: coarse grid
// over U(2) followed by a simplex polish.
double u2_grid_oracle(const StinespringDilation& v0, const StinespringDilation& v1) {
    auto value = [&](const RVector& z) {
        return alignment_value(v0, v1, {unitary_from_coords(z, 2)});
    };
    double best = std::numeric_limits<double>::infinity();
    RVector best_z = RVector::Zero(4);
    const int steps = 9;
    RVector z(4);
    for (int a = 0; a < steps; ++a)
        for (int b = 0; b < steps; ++b)
            for (int c = 0; c < steps; ++c)
                for (int e = 0; e < steps; ++e) {
                    z << 2 * kPi * a / steps, 2 * kPi * b / steps, kPi * (c - steps / 2) / steps,
                        kPi * (e - steps / 2) / steps;
                    const double v = value(z);
                    if (v < best) {
                        best = v;
                        best_z = z;
                    }
                }
    return nelder_mead(value, best_z, 0.1, 4000, 1e-14).value;
}

}  // namespace

TEST_CASE("align examples") {
    Rng rng(1);
    const StinespringDilation v0 = random_dilation(2, 2, 2, rng);
    const AlignResult same = align_isometries(v0, v0);
    CHECK(same.value < 1e-8);
    CHECK(max_abs(same.unitaries[0] - identity(same.dim_a[0])) < 1e-6);

    const CMatrix w = haar_unitary(2, rng);
    const StinespringDilation v1 = apply_alice(v0, {w});
    const AlignResult r = align_isometries(v0, v1);
    CHECK(r.value <= 1e-8);
    CHECK(r.converged);
    // v0 has full Alice support here, so W is pinned down.
    CHECK(max_abs(r.unitaries[0].topLeftCorner(2, 2) - w) < 1e-6);
}

TEST_CASE("align property: value within the dual bound and below the grid oracle") {
    Rng rng(2);
    for (int t = 0; t < 8; ++t) {
        const StinespringDilation v0 = random_dilation(2, 2, 2, rng), v1 = random_dilation(2, 2, 2, rng);
        AlignOptions opts;
        opts.allow_padding = false;
        const AlignResult r = align_isometries(v0, v1, opts);
        CHECK(r.lower_bound <= r.value + 1e-12);
        CHECK(std::abs(alignment_value(v0, v1, r.unitaries) - r.value) < 1e-10);
        const double oracle = u2_grid_oracle(v0, v1);
        CHECK(r.value <= oracle + 1e-6);
        CHECK(r.value >= oracle - 1e-4);
        for (int s = 0; s < 5; ++s) {
            const CMatrix rho = random_density(2, 2, rng);
            CHECK(r.value * r.value >= 2.0 - 2.0 * overlap_dual(v0, v1, rho) - 1e-9);
        }
    }
}

TEST_CASE("blockwise and unrestricted alignment agree on direct sums") {
    Rng rng(3);
    for (int t = 0; t < 4; ++t) {
        StinespringDilation v0, v1;
        const CMatrix a0 = random_isometry(4, 2, rng), b0 = random_isometry(6, 2, rng);
        const CMatrix a1 = random_isometry(4, 2, rng), b1 = random_isometry(6, 2, rng);
        const double p = 0.6;
        v0.v = CMatrix(10, 2);
        v0.v << std::sqrt(p) * a0, std::sqrt(1 - p) * b0;
        v1.v = CMatrix(10, 2);
        v1.v << std::sqrt(p) * a1, std::sqrt(1 - p) * b1;
        v0.blocks = v1.blocks = {DilationBlock{{0}, 2, 2}, DilationBlock{{1}, 2, 3}};
        AlignOptions blk, flat;
        flat.blockwise = false;
        const double vb = align_isometries(v0, v1, blk).value;
        const double vf = align_isometries(embed_diagonal(v0), embed_diagonal(v1), flat).value;
        CHECK(vf <= vb + 1e-8);
        CHECK(std::abs(vb - vf) < 1e-8);
    }
}

TEST_CASE("halmos dilation is unitary with the contraction in its corner") {
    Rng rng(4);
    for (int t = 0; t < 10; ++t) {
        CMatrix c = ginibre(3, 3, rng);
        c /= operator_norm(c) * 1.1;
        const CMatrix u = halmos_dilation(c);
        CHECK(max_abs(u.adjoint() * u - identity(6)) < 1e-10);
        CHECK(max_abs(u.topLeftCorner(3, 3) - c) < 1e-14);
    }
}

TEST_CASE("ellipsoid method minimizes a convex quadratic") {
    RVector target(2);
    target << 0.3, -0.2;
    auto oracle = [&](const RVector& z) {
        EllipsoidCut cut;
        cut.value = (z - target).squaredNorm();
        cut.cut = 2.0 * (z - target);
        return cut;
    };
    const EllipsoidResult r = ellipsoid_minimize(RVector::Zero(2), 1.0, oracle, 2000, 1e-10);
    CHECK(r.found_feasible);
    CHECK(r.best_value < 1e-8);
    CHECK(r.lower_bound <= r.best_value + 1e-12);
}

TEST_CASE("nelder mead finds the minimum of a shifted bowl") {
    auto f = [](const RVector& x) { return std::pow(x(0) - 1.0, 2) + 3.0 * std::pow(x(1) + 2.0, 2); };
    const SimplexResult r = nelder_mead(f, RVector::Zero(2), 0.5, 2000, 1e-16);
    CHECK(std::abs(r.x(0) - 1.0) < 1e-5);
    CHECK(std::abs(r.x(1) + 2.0) < 1e-5);
}

TEST_CASE("unitary from coordinates is unitary") {
    Rng rng(5);
    std::normal_distribution<double> g;
    for (int d : {1, 2, 4}) {
        RVector z(d * d);
        for (int i = 0; i < d * d; ++i) z(i) = g(rng);
        const CMatrix u = unitary_from_coords(z, d);
        CHECK(max_abs(u.adjoint() * u - identity(d)) < 1e-12);
    }
    CHECK(max_abs(unitary_from_coords(RVector::Zero(4), 2) - identity(2)) < 1e-15);
}
