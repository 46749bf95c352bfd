#include <cmath>

#include "helpers.hpp"
#include "qbc/channels.hpp"

using namespace qbc;
using namespace qbc::test;

namespace {

// (1/d) sum_jk c(|j><k|) x |j><k| with the output factor first.
CMatrix choi_oracle(const Channel& c) {
    const int din = c.in_dim(), dout = c.out_dim();
    CMatrix out = CMatrix::Zero(din * dout, din * dout);
    for (int j = 0; j < din; ++j)
        for (int k = 0; k < din; ++k) {
            CMatrix e = CMatrix::Zero(din, din);
            e(j, k) = 1.0;
            out += kron(apply_map(c, e), e);
        }
    return out / static_cast<double>(din);
}

std::vector<CMatrix> paulis_over_two() {
    return {identity(2) / 2.0, pauli_x() / 2.0, pauli_y() / 2.0, pauli_z() / 2.0};
}

}  // namespace

TEST_CASE("application examples") {
    Rng rng(1);
    const CMatrix rho = random_density(3, 2, rng);
    CHECK(max_abs(apply_map(Channel::identity(3), rho) - rho) < 1e-15);
    CHECK(max_abs(apply_map(depolarizing(3), rho) - identity(3) / 3.0) < 1e-15);
    CHECK(max_abs(apply_map(Channel::from_kraus(depolarizing(3).flat_kraus()), rho) - identity(3) / 3.0) < 1e-15);

    const CVector plus = ket({1, 1}) / std::sqrt(2.0);
    const Channel meas = measurement_channel({projector(basis_vector(2, 0)), projector(basis_vector(2, 1))}, {{1}, {2}});
    const HybridState out = apply_labeled(meas, DensityMatrix::pure(plus));
    CHECK(out.branches().size() == 2);
    CHECK(out.at({1}).weight == doctest::Approx(0.5));
    CHECK(out.at({2}).weight == doctest::Approx(0.5));
}

TEST_CASE("construction validates completeness") {
    CHECK_THROWS_AS(Channel::from_kraus({identity(2) * 0.5}), InvalidChannelError);
    CHECK_NOTHROW(Channel::from_kraus({identity(2) * 0.5}, false));
    CHECK_THROWS_AS(Channel::from_kraus({identity(2), identity(3)}), ShapeError);
}

TEST_CASE("composition matches explicit Kraus products and sequential application") {
    Rng rng(2);
    for (int t = 0; t < 10; ++t) {
        const Channel a = random_channel(2, 2, 2, rng), b = random_channel(2, 2, 3, rng);
        const Channel ab = compose(a, b);
        std::vector<CMatrix> products;
        for (const auto& kb : b.flat_kraus())
            for (const auto& ka : a.flat_kraus()) products.push_back(kb * ka);
        CHECK(max_abs(choi(ab) - choi_oracle(Channel::from_kraus(products))) < 1e-13);
        const CMatrix rho = random_density(2, 2, rng);
        CHECK(max_abs(apply_map(ab, rho) - apply_map(b, apply_map(a, rho))) < 1e-13);
    }
}

TEST_CASE("tensor product acts factorwise") {
    Rng rng(3);
    const Channel a = random_channel(2, 3, 2, rng), b = random_channel(2, 2, 2, rng);
    const CMatrix r1 = random_density(2, 2, rng), r2 = random_density(2, 1, rng);
    CHECK(max_abs(apply_map(tensor(a, b), kron(r1, r2)) - kron(apply_map(a, r1), apply_map(b, r2))) < 1e-13);
}

TEST_CASE("stinespring examples") {
    Rng rng(4);
    const CMatrix u = haar_unitary(3, rng);
    const StinespringDilation du = stinespring(Channel::unitary(u));
    REQUIRE(du.blocks.size() == 1);
    CHECK(du.blocks[0].dim_a == 1);
    CHECK(max_abs(du.v - u) < 1e-15);

    const Channel pauli = Channel::from_kraus(paulis_over_two());
    const StinespringDilation dp = stinespring(pauli);
    CHECK(dp.blocks[0].dim_a == 4);
    CHECK(max_abs(choi(bob_channel(dp)) - choi(pauli)) <= 1e-12);
    CHECK(max_abs(choi(pauli) - identity(4) / 4.0) < 1e-15);

    for (int t = 0; t < 10; ++t) {
        const Channel c = random_channel(2, 2, 3, rng);
        const StinespringDilation d = stinespring(c);
        CHECK_NOTHROW(d.check());
        CHECK(max_abs(choi(bob_channel(d)) - choi(c)) <= 1e-10);
    }
}

TEST_CASE("choi examples") {
    CHECK(max_abs(choi(Channel::identity(2)) - projector(max_entangled(2))) < 1e-15);
    CHECK(max_abs(choi(depolarizing(3)) - identity(9) / 9.0) < 1e-15);
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        const Channel c = random_channel(2 + t % 3, 2 + t % 2, 2 + t % 3, rng);
        const CMatrix j = choi(c);
        CHECK(std::abs(j.trace() - cplx(1)) < 1e-12);
        CHECK(max_abs(j - choi_oracle(c)) < 1e-13);
    }
}

TEST_CASE("channel fidelity and average fidelity") {
    CHECK(channel_fidelity(Channel::identity(3)) == doctest::Approx(1.0));
    CHECK(channel_fidelity(depolarizing(4)) == doctest::Approx(1.0 / 16));
    Rng rng(6);
    const CMatrix u = haar_unitary(3, rng);
    CHECK(std::abs(channel_fidelity(Channel::unitary(u)) - std::norm(u.trace()) / 9.0) < 1e-14);

    CHECK(average_fidelity_exact(Channel::identity(3)) == doctest::Approx(1.0));
    for (int d : {2, 3, 5}) {
        CHECK(std::abs(average_fidelity_exact(depolarizing(d)) - 1.0 / d) < 1e-14);
        CHECK(std::abs(average_fidelity_exact(Channel::from_kraus(depolarizing(d).flat_kraus())) - 1.0 / d) < 1e-14);
    }
}

TEST_CASE("average fidelity property: exact form agrees with Choi overlap") {
    Rng rng(7);
    for (int t = 0; t < 20; ++t) {
        const int d = 2 + t % 3;
        const Channel c = random_channel(d, d, 1 + t % 3, rng);
        const CVector omega = max_entangled(d);
        const double fc = (omega.adjoint() * choi_oracle(c) * omega)(0, 0).real();
        CHECK(std::abs(channel_fidelity(c) - fc) < 1e-13);
        CHECK(std::abs(average_fidelity_exact(c) - (d * fc + 1.0) / (d + 1.0)) < 1e-13);
    }
}

TEST_CASE("choi lower bound examples") {
    Rng rng(8);
    const Channel c = random_channel(3, 3, 2, rng);
    CHECK(cb_lower_choi(c, c) == doctest::Approx(0.0));
    for (int d : {2, 3, 4}) {
        const Channel r = Channel::unitary(haar_unitary(d, rng));
        const double want = 2.0 - 2.0 / (d * d);
        CHECK(std::abs(cb_lower_choi(r, depolarizing(d)) - want) < 1e-12);
        CHECK(std::abs(cb_lower_choi(r, depolarizing(d), ChoiPath::Dense) - want) < 1e-12);
        CHECK(std::abs(cb_lower_choi(r, depolarizing(d), ChoiPath::LowRank) - want) < 1e-12);
    }
    for (int t = 0; t < 20; ++t) {
        const Channel a = random_channel(2, 2, 2, rng), b = random_channel(2, 2, 3, rng);
        const double v = cb_lower_choi(a, b);
        CHECK(v <= 2.0 + 1e-12);
        CHECK(std::abs(v - hermitian_trace_norm(choi(a) - choi(b))) < 1e-12);
    }
}

TEST_CASE("low-rank and dense choi paths agree on randomizing channels") {
    for (int mu : {1, 2, 5}) {
        const Channel r = randomizing_channel(4, mu, Seed{3, 0});
        CHECK(std::abs(cb_lower_choi(r, depolarizing(4), ChoiPath::Dense) -
                       cb_lower_choi(r, depolarizing(4), ChoiPath::LowRank)) < 1e-12);
    }
}

TEST_CASE("operator norm estimate examples") {
    Rng rng(9);
    const Channel c = random_channel(2, 2, 2, rng);
    CHECK(op_norm_estimate(c, c, 4, Seed{1, 0}).value < 1e-12);
    const NormEstimate e = op_norm_estimate(Channel::unitary(pauli_z()), Channel::identity(2), 8, Seed{1, 0});
    CHECK(std::abs(e.value - 2.0) < 1e-8);
    // The witness is an equator state like |+>.
    CHECK(std::abs(std::norm(e.witness(0)) - 0.5) < 1e-4);
}

TEST_CASE("norm estimates property: ordered and within the exact range") {
    Rng rng(10);
    for (int t = 0; t < 10; ++t) {
        const Channel a = random_channel(2, 2, 2, rng), b = random_channel(2, 2, 2, rng);
        const double op = op_norm_estimate(a, b, 8, Seed{2, static_cast<std::uint64_t>(t)}).value;
        const double dia = diamond_estimate(a, b, 8, Seed{3, static_cast<std::uint64_t>(t)}).value;
        const double choi_lb = cb_lower_choi(a, b);
        CHECK(op <= dia + 1e-6);
        CHECK(choi_lb <= dia + 1e-6);
        CHECK(dia <= 2.0 + 1e-12);
        // A random input never beats the estimate by much.
        const CVector psi = haar_state(2, rng);
        CHECK(trace_norm(apply_pure(a, psi) - apply_pure(b, psi)) <= op + 1e-9);
    }
}

TEST_CASE("randomizing channel and mu_star") {
    const Channel one = randomizing_channel(3, 1, Seed{4, 0});
    CHECK(one.kraus_count() == 1);
    const CMatrix u = one.flat_kraus().front();
    CHECK(max_abs(u.adjoint() * u - identity(3)) < 1e-12);
    CHECK(mu_star(16, 1.0) == 5945);
    CHECK(mu_star(16, 1.0) == static_cast<long long>(std::ceil(134.0 * 16 * std::log(16.0))));
    CHECK(mu_star(16, 1.0, 2.0) == 134 * 16 * 4);
}

TEST_CASE("measure and prepare channels") {
    const MubPair m = fourier_mub(3);
    std::vector<CMatrix> povm, states;
    for (int k = 0; k < 3; ++k) {
        povm.push_back(projector(m.e[k]));
        states.push_back(projector(m.f[k]));
    }
    const Channel c = measure_prepare(povm, states);
    Rng rng(11);
    const CMatrix rho = random_density(3, 3, rng);
    CMatrix want = CMatrix::Zero(3, 3);
    for (int k = 0; k < 3; ++k) want += (povm[k] * rho).trace() * states[k];
    CHECK(max_abs(apply_map(c, rho) - want) < 1e-13);
    povm[0] *= 0.5;
    CHECK_THROWS(measure_prepare(povm, states));
}

TEST_CASE("energy truncation examples") {
    CMatrix h = CMatrix::Zero(16, 16);
    for (int i = 0; i < 16; ++i) h(i, i) = i;
    const Truncation t = energy_truncate(Channel::identity(16), EnergyConstraint{h, 2.0}, 0.25);
    CHECK(t.rank == 9);
    CHECK(std::abs(t.bound - (4.0 * 0.5 + 2.0 * 0.25 / 0.75)) < 1e-15);

    CMatrix small = CMatrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) small(i, i) = 0.1 * i;
    Rng rng(12);
    const Channel u = Channel::unitary(CMatrix(CMatrix::Identity(4, 4)));
    const Truncation all = energy_truncate(u, EnergyConstraint{small, 0.3}, 0.05);
    CHECK(all.rank == 4);
    CHECK(max_abs(all.projector - identity(4)) < 1e-15);
    const CMatrix rho = random_density(4, 2, rng);
    CHECK(max_abs(apply_map(all.compressed, rho) - rho) < 1e-14);
    CHECK_THROWS_AS(energy_truncate(u, EnergyConstraint{small, 0.3}, 1.5), DomainError);
}

TEST_CASE("fidelity sum optimizer reaches one plus fidelity") {
    Rng rng(13);
    for (int t = 0; t < 10; ++t) {
        const CMatrix a = random_density(3, 2, rng), b = random_density(3, 3, rng);
        const FidelitySumResult r = maximize_fidelity_sum(a, b, Seed{5, static_cast<std::uint64_t>(t)});
        const double target = 1.0 + fidelity(a, b);
        CHECK(r.value <= target + 1e-9);
        CHECK(r.value >= target - 1e-3);
        CHECK(std::abs(r.value - (std::pow(fidelity(a, r.omega), 2) + std::pow(fidelity(b, r.omega), 2))) < 1e-8);
    }
}
