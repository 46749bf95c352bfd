#include <cmath>

#include "helpers.hpp"
#include "qbc/hybrid.hpp"

using namespace qbc;
using namespace qbc::test;

TEST_CASE("hybrid expectation examples") {
    Rng rng(1);
    const CMatrix rho = random_density(3, 2, rng);
    HybridState s;
    s.add({0}, 0.25, rho);
    s.add({1}, 0.75, random_density(2, 2, rng));
    CHECK(std::abs(hybrid_expectation(s, {{{0}, identity(3)}, {{1}, identity(2)}}) - cplx(1)) < 1e-14);

    const CVector psi = haar_state(3, rng);
    const HybridState pure = HybridState::single(projector(psi), {2});
    CHECK(std::abs(hybrid_expectation(pure, {{{2}, projector(psi)}}) - cplx(1)) < 1e-12);

    HybridState split;
    split.add({0}, 0.5, rho);
    split.add({1}, 0.5, rho);
    CHECK(std::abs(hybrid_expectation(split, {{{0}, identity(3)}, {{1}, -identity(3)}})) < 1e-14);
}

TEST_CASE("hybrid expectation rejects mismatched operators") {
    const HybridState s = HybridState::single(identity(2) / 2.0, {0});
    CHECK_THROWS_AS(hybrid_expectation(s, {{{1}, identity(2)}}), StructureError);
    CHECK_THROWS_AS(hybrid_expectation(s, {{{0}, identity(3)}}), StructureError);
}

TEST_CASE("hybrid trace distance examples") {
    Rng rng(2);
    const CMatrix rho = random_density(2, 2, rng);
    const HybridState one = HybridState::single(rho, {0});
    CHECK(hybrid_trace_distance(one, one) == 0.0);

    HybridState split;
    split.add({0}, 0.5, rho);
    split.add({1}, 0.5, rho);
    // ||rho/2 - rho||_1 + ||rho/2||_1
    CHECK(std::abs(hybrid_trace_distance(one, split) - 1.0) < 1e-14);

    const HybridState a = HybridState::single(projector(basis_vector(2, 0)));
    const HybridState b = HybridState::single(projector(basis_vector(2, 1)));
    CHECK(std::abs(hybrid_trace_distance(a, b) - 2.0) < 1e-14);
}

TEST_CASE("hybrid trace distance property: metric axioms") {
    Rng rng(3);
    auto random_hybrid = [&] {
        HybridState s;
        const double w = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
        s.add({0}, w, random_density(2, 2, rng));
        s.add({1}, 1.0 - w, random_density(3, 1, rng));
        return s;
    };
    for (int t = 0; t < 40; ++t) {
        const HybridState s = random_hybrid(), u = random_hybrid(), v = random_hybrid();
        const double st = hybrid_trace_distance(s, u);
        CHECK(st >= 0.0);
        CHECK(st <= 2.0 + 1e-12);
        CHECK(std::abs(st - hybrid_trace_distance(u, s)) < 1e-14);
        CHECK(st <= hybrid_trace_distance(s, v) + hybrid_trace_distance(v, u) + 1e-12);
    }
}

TEST_CASE("weights and normalization") {
    HybridState s;
    s.add_unnormalized({0}, identity(2) * 0.3);
    s.add_unnormalized({1}, projector(basis_vector(2, 1)) * 0.4);
    CHECK(s.total_weight() == doctest::Approx(1.0));
    CHECK(s.at({0}).weight == doctest::Approx(0.6));
    CHECK(std::abs(s.at({0}).state.trace() - cplx(1)) < 1e-14);
    CHECK_NOTHROW(s.check_normalized());
    HybridState light;
    light.add({0}, 0.5, identity(2) / 2.0);
    CHECK_THROWS(light.check_normalized());
}

TEST_CASE("restriction to one party") {
    Rng rng(4);
    const CMatrix ra = random_density(2, 2, rng), rb = random_density(3, 2, rng);
    const HybridState prod = HybridState::single(kron(ra, rb), {0});
    CHECK(max_abs(restrict_party(prod, Party::Bob, {{{0}, {2, 3}}}).at({0}).state - rb) < 1e-14);
    CHECK(max_abs(restrict_party(prod, Party::Alice, {{{0}, {2, 3}}}).at({0}).state - ra) < 1e-14);

    const HybridState bell = HybridState::single(projector(max_entangled(2)));
    CHECK(max_abs(restrict_party(bell, Party::Bob, {{{}, {2, 2}}}).at({}).state - identity(2) / 2.0) < 1e-15);

    HybridState multi;
    BranchDims dims;
    std::vector<CMatrix> states;
    for (int x = 0; x < 4; ++x) {
        const int da = 1 + x % 2, db = 2 + x % 3;
        states.push_back(random_density(da * db, 3, rng));
        multi.add({x}, 0.25, states.back());
        dims[{x}] = {da, db};
    }
    const HybridState bob = restrict_party(multi, Party::Bob, dims);
    for (int x = 0; x < 4; ++x) {
        const auto [da, db] = dims.at({x});
        CMatrix oracle = CMatrix::Zero(db, db);
        for (int a = 0; a < da; ++a) oracle += states[x].block(a * db, a * db, db, db);
        CHECK(max_abs(bob.at({x}).state - oracle) < 1e-14);
        CHECK(bob.at({x}).weight == doctest::Approx(0.25));
    }
    CHECK_THROWS_AS(restrict_party(multi, Party::Bob, {}), StructureError);
}

TEST_CASE("restriction never increases distance") {
    Rng rng(5);
    for (int t = 0; t < 30; ++t) {
        HybridState s, u;
        BranchDims dims{{{0}, {2, 2}}, {{1}, {3, 2}}};
        s.add({0}, 0.4, random_density(4, 2, rng));
        s.add({1}, 0.6, random_density(6, 2, rng));
        u.add({0}, 0.7, random_density(4, 2, rng));
        u.add({1}, 0.3, random_density(6, 2, rng));
        CHECK(hybrid_trace_distance(restrict_party(s, Party::Bob, dims), restrict_party(u, Party::Bob, dims)) <=
              hybrid_trace_distance(s, u) + 1e-12);
    }
}

TEST_CASE("label formatting") {
    CHECK(label_string({}) != label_string({0}));
    CHECK(label_string({1, 0}) != label_string({0, 1}));
}
