#include <cmath>

#include "helpers.hpp"

using namespace qbc;
using namespace qbc::test;

TEST_CASE("kron identity and diagonal cases") {
    CHECK(max_abs(kron(identity(2), identity(2)) - identity(4)) == 0.0);
    CMatrix a = CMatrix::Zero(2, 2), b = CMatrix::Zero(2, 2);
    a(0, 0) = 1;
    a(1, 1) = 2;
    b(0, 0) = 3;
    b(1, 1) = 4;
    const CMatrix k = kron(a, b);
    CHECK(k(0, 0) == cplx(3));
    CHECK(k(1, 1) == cplx(4));
    CHECK(k(2, 2) == cplx(6));
    CHECK(k(3, 3) == cplx(8));
    CHECK(max_abs(k - CMatrix(k.diagonal().asDiagonal())) == 0.0);
}

TEST_CASE("kron matches the entrywise definition") {
    Rng rng(3);
    for (const auto& [a, b] : {std::pair{pauli_x(), pauli_z()}, std::pair{ginibre(2, 3, rng), ginibre(3, 2, rng)}}) {
        const CMatrix k = kron(a, b);
        REQUIRE(k.rows() == a.rows() * b.rows());
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                for (Eigen::Index p = 0; p < b.rows(); ++p)
                    for (Eigen::Index q = 0; q < b.cols(); ++q)
                        CHECK(std::abs(k(i * b.rows() + p, j * b.cols() + q) - a(i, j) * b(p, q)) < 1e-15);
    }
}

TEST_CASE("kron refuses oversized products") {
    CHECK_THROWS_AS(kron(identity(64), identity(64), 1000), DimensionLimitError);
}

TEST_CASE("partial trace examples") {
    const CMatrix omega = projector(max_entangled(2));
    CHECK(max_abs(partial_trace(omega, {2, 2}, {1}) - identity(2) / 2.0) < 1e-15);

    Rng rng(5);
    const CMatrix rho = random_density(3, 2, rng), sigma = random_density(2, 2, rng);
    CHECK(max_abs(partial_trace(kron(rho, sigma), {3, 2}, {0}) - rho) < 1e-14);
    CHECK(max_abs(partial_trace(kron(rho, sigma), {3, 2}, {1}) - sigma) < 1e-14);
}

TEST_CASE("partial trace over four qubits matches index summation") {
    Rng rng(11);
    const CMatrix rho = random_density(16, 16, rng);
    const CMatrix got = partial_trace(rho, {2, 2, 2, 2}, {0, 2});
    CMatrix want = CMatrix::Zero(4, 4);
    auto idx = [](int a, int b, int c, int d) { return ((a * 2 + b) * 2 + c) * 2 + d; };
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c)
            for (int a2 = 0; a2 < 2; ++a2)
                for (int c2 = 0; c2 < 2; ++c2)
                    for (int b = 0; b < 2; ++b)
                        for (int d = 0; d < 2; ++d) want(a * 2 + c, a2 * 2 + c2) += rho(idx(a, b, c, d), idx(a2, b, c2, d));
    CHECK(max_abs(got - want) < 1e-14);
}

TEST_CASE("partial trace property: trace and positivity are kept") {
    Rng rng(13);
    for (int t = 0; t < 50; ++t) {
        const int d1 = 1 + t % 3, d2 = 2 + t % 2;
        const CMatrix rho = random_density(d1 * d2, 1 + t % 4, rng);
        const CMatrix r = partial_trace(rho, {d1, d2}, {t % 2});
        CHECK(std::abs(r.trace() - cplx(1)) < 1e-12);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(r);
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
    }
}

TEST_CASE("trace norm examples") {
    CHECK(trace_norm(pauli_z()) == doctest::Approx(2.0).epsilon(1e-15));
    Rng rng(17);
    CHECK(trace_norm(random_density(5, 3, rng)) == doctest::Approx(1.0).epsilon(1e-12));
    const CVector plus = ket({1, 1}) / std::sqrt(2.0);
    const CMatrix diff = projector(basis_vector(2, 0)) - projector(plus);
    CHECK(std::abs(trace_norm(diff) - std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(trace_norm(diff) - hermitian_trace_norm(diff)) < 1e-12);
}

TEST_CASE("trace norm property: triangle inequality and unitary invariance") {
    Rng rng(19);
    for (int t = 0; t < 50; ++t) {
        const CMatrix a = ginibre(3, 3, rng), b = ginibre(3, 3, rng);
        CHECK(trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-12);
        const CMatrix u = haar_unitary(3, rng);
        CHECK(std::abs(trace_norm(u * a) - trace_norm(a)) < 1e-12);
    }
}

TEST_CASE("fidelity examples") {
    Rng rng(23);
    const CMatrix rho = random_density(3, 2, rng);
    CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fidelity(projector(basis_vector(2, 0)), projector(basis_vector(2, 1))) == doctest::Approx(0.0));
    const CVector plus = ket({1, 1}) / std::sqrt(2.0);
    CHECK(std::abs(fidelity(projector(basis_vector(2, 0)), projector(plus)) - 1.0 / std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("fidelity property: symmetric, bounded, equal to overlap for pure states") {
    Rng rng(29);
    for (int t = 0; t < 50; ++t) {
        const CMatrix a = random_density(3, 1 + t % 3, rng), b = random_density(3, 1 + (t / 3) % 3, rng);
        const double f = fidelity(a, b);
        CHECK(f >= -1e-12);
        CHECK(f <= 1.0 + 1e-10);
        CHECK(std::abs(f - fidelity(b, a)) < 1e-8);
        const CVector p = haar_state(3, rng), q = haar_state(3, rng);
        CHECK(std::abs(fidelity(projector(p), projector(q)) - std::abs(p.dot(q))) < 1e-7);
    }
}

TEST_CASE("density matrix validation") {
    CHECK_THROWS_AS((void)DensityMatrix(pauli_z(), 1e-10), DomainError);
    CHECK_THROWS_AS((void)DensityMatrix(identity(2), 1e-10), DomainError);
    CHECK_NOTHROW(DensityMatrix::maximally_mixed(3));
    CHECK_THROWS_AS(psd_sqrt(pauli_z()), DomainError);
}

TEST_CASE("polar alignment examples") {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = 2;
    m(1, 1) = 3;
    PolarResult r = polar_align(m);
    CHECK(max_abs(r.unitary - identity(2)) < 1e-12);
    CHECK(r.value == doctest::Approx(5.0));
    r = polar_align(pauli_x());
    CHECK(max_abs(r.unitary - pauli_x()) < 1e-12);
    CHECK(r.value == doctest::Approx(2.0));
}

TEST_CASE("polar alignment property: value is the trace norm and is attained") {
    Rng rng(31);
    for (int t = 0; t < 30; ++t) {
        const CMatrix m = ginibre(3, 3, rng);
        const PolarResult r = polar_align(m);
        CHECK(std::abs(r.value - trace_norm(m)) < 1e-10);
        CHECK(std::abs((r.unitary * m).trace().real() - r.value) < 1e-10);
        CHECK(max_abs(r.unitary.adjoint() * r.unitary - identity(3)) < 1e-12);
        // No random unitary does better.
        CHECK((haar_unitary(3, rng) * m).trace().real() <= r.value + 1e-12);
    }
}

TEST_CASE("haar unitary: d = 1 and unitarity") {
    Rng rng(37);
    const CMatrix one = haar_unitary(1, rng);
    CHECK(std::abs(std::abs(one(0, 0)) - 1.0) < 1e-14);
    for (int d : {2, 3, 5}) {
        const CMatrix u = haar_unitary(d, rng);
        CHECK(max_abs(u.adjoint() * u - identity(d)) < 1e-12);
    }
}

TEST_CASE("haar unitary second moment") {
    Rng rng(41);
    const int n = 100000, d = 4;
    double sum = 0.0, sum_sq = 0.0;
    for (int s = 0; s < n; ++s) {
        const double v = std::norm(haar_unitary(d, rng)(0, 0));
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    CHECK(std::abs(mean - 1.0 / d) <= 3.0 * se);
}

TEST_CASE("seeded streams are reproducible and distinct") {
    CHECK(max_abs(haar_unitary(3, Seed{9, 1}) - haar_unitary(3, Seed{9, 1})) == 0.0);
    CHECK(max_abs(haar_unitary(3, Seed{9, 1}) - haar_unitary(3, Seed{9, 2})) > 1e-3);
    CHECK(max_abs(haar_unitary(3, Seed{9, 1}.child(0)) - haar_unitary(3, Seed{9, 1}.child(1))) > 1e-3);
}

TEST_CASE("fourier mub at d = 2 and unbiasedness") {
    const MubPair m = fourier_mub(2);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(max_abs(m.f[0] - ket({-r, r})) < 1e-15);
    CHECK(max_abs(m.f[1] - ket({r, r})) < 1e-15);
    for (int d : {2, 3, 5, 8}) {
        const MubPair b = fourier_mub(d);
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                CHECK(std::abs(std::norm(b.e[j].dot(b.f[k])) - 1.0 / d) < 1e-14);
                CHECK(std::abs(b.f[j].dot(b.f[k]) - cplx(j == k ? 1.0 : 0.0)) < 1e-14);
            }
    }
}

TEST_CASE("maximally entangled vector") {
    CHECK(max_entangled(1).size() == 1);
    CHECK(std::abs(max_entangled(1)(0) - cplx(1)) < 1e-15);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(max_abs(max_entangled(2) - ket({r, 0, 0, r})) < 1e-15);
    for (int d : {2, 3, 6})
        CHECK(max_abs(partial_trace(projector(max_entangled(d)), {d, d}, {0}) - identity(d) / double(d)) < 1e-12);
}
