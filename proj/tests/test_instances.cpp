#include <cmath>

#include "helpers.hpp"
#include "qbc/instances.hpp"

using namespace qbc;
using namespace qbc::test;

TEST_CASE("shredder: identity cheat at d = 2 succeeds with probability one half") {
    const ShredderInstance s = shredder_build(2);
    const ShredderOutcome o = shredder_eval(s, Channel::identity(2));
    CHECK(std::abs(o.success_as_1 - 0.5) < 1e-15);
    CHECK(std::abs(o.success_as_0 - 0.5) < 1e-15);
}

TEST_CASE("shredder: direct overlap sum gives 1/d") {
    for (int d : {2, 3, 5}) {
        const ShredderInstance s = shredder_build(d);
        double sum = 0.0;
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                sum += std::norm(s.e[j].dot(s.f[k])) * std::norm(s.e[j].dot(CVector(s.f[k].conjugate())));
        CHECK(std::abs(sum / d - 1.0 / d) < 1e-14);
        CHECK(std::abs(shredder_eval(s, Channel::identity(d)).success_as_1 - sum / d) < 1e-14);
    }
}

TEST_CASE("shredder: any cheat channel succeeds with probability 1/d") {
    Rng rng(1);
    for (int d : {2, 4, 8}) {
        const ShredderInstance s = shredder_build(d);
        CHECK(shredder_marginal_error(s) <= 1e-12);
        for (int t = 0; t < 5; ++t) {
            const ShredderOutcome o = shredder_eval(s, random_channel(d, d, 1 + t, rng));
            CHECK(std::abs(o.success_as_1 - 1.0 / d) < 1e-9);
            CHECK(std::abs(o.success_as_0 - 1.0 / d) < 1e-9);
        }
        CHECK_THROWS_AS(shredder_eval(s, Channel::identity(d + 1)), ShapeError);
    }
}

TEST_CASE("monster: dilations restrict to the channel pair") {
    const MonsterInstance m = monster_build(4, 3, Seed{2, 0});
    CHECK(m.dim_a == 16);
    CHECK(max_abs(choi(bob_channel(m.v0)) - choi(m.randomizing)) < 1e-12);
    CHECK(max_abs(choi(bob_channel(m.v1)) - choi(m.depolarizing)) < 1e-12);
}

TEST_CASE("monster: Choi bound") {
    for (auto [d, mu] : {std::pair{4, 1}, std::pair{8, 1}, std::pair{8, 2}, std::pair{4, 5}}) {
        const MonsterInstance m = monster_build(d, mu, Seed{3, 0});
        const double cb = cb_lower_choi(m.randomizing, m.depolarizing);
        const double bound = 2.0 - 2.0 * mu / double(d * d);
        CHECK(cb >= bound - 1e-9);
        if (mu == 1) CHECK(std::abs(cb - bound) < 1e-9);
    }
}

TEST_CASE("monster: passive cheat chain and bound") {
    for (auto [d, mu] : {std::pair{4, 2}, std::pair{16, 8}}) {
        const MonsterInstance m = monster_build(d, mu, Seed{4, 0});
        const PassiveCheat p = monster_passive_cheat(m);
        CHECK(p.chain_holds);
        CHECK(p.bound_holds);
        CHECK(p.probability <= 1.0 / d + (2.0 - cb_lower_choi(m.randomizing, m.depolarizing)) + 1e-9);
        // P is the Haar-averaged overlap of A -> K A K^dag, a trace-decreasing map.
        const CMatrix k = m.v0.v.adjoint() * m.v1.v;
        const double want = (std::norm(k.trace()) + k.squaredNorm()) / (d * (d + 1.0));
        CHECK(std::abs(p.probability - want) < 1e-12);
        CHECK(std::abs(p.channel_fidelity - std::norm(k.trace()) / double(d * d)) < 1e-12);
    }
}

TEST_CASE("monster: passive cheat limits") {
    MonsterInstance same = monster_build(4, 2, Seed{5, 0});
    same.v1 = same.v0;
    same.depolarizing = same.randomizing;
    CHECK(monster_passive_cheat(same).probability == doctest::Approx(1.0).epsilon(1e-10));

    MonsterInstance apart = monster_build(4, 2, Seed{5, 0});
    // Shift V1 into Alice levels V0 never uses.
    StinespringDilation moved = apart.v0;
    const int db = 4, used = 2;
    moved.v.setZero();
    moved.v.middleRows(used * db, used * db) = apart.v0.v.topRows(used * db);
    apart.v1 = moved;
    CHECK(monster_passive_cheat(apart).probability < 1e-10);
}

TEST_CASE("monster: honest play is sound and attacks stay bounded") {
    const MonsterInstance m = monster_build(8, 2, Seed{1, 0});
    const double cb = cb_lower_choi(m.randomizing, m.depolarizing);
    CHECK(std::abs(cb - 1.9375) < 0.01);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(monster_honest_acceptance(m, k) - 1.0) < 1e-10);

    const AttackOutcome honest = monster_general_attack(m, monster_honest_attack(m), cb);
    CHECK(std::abs(honest.accept[0] - 1.0) < 1e-10);
    CHECK(std::abs(honest.probability - 0.5 * (1.0 + honest.accept[1])) < 1e-12);

    const PassiveCheat pc = monster_passive_cheat(m);
    const AttackOutcome passive = monster_general_attack(m, monster_passive_attack(m), cb);
    CHECK(std::abs(passive.probability - (0.5 + 0.5 * pc.probability)) < 1e-9);

    Rng rng(6);
    for (int t = 0; t < 5; ++t) {
        const AttackOutcome o = monster_general_attack(m, monster_random_attack(m, 2 + t % 2, rng), cb);
        CHECK(o.within);
        CHECK(o.probability <= 0.5 + 1.0 / 8 + 0.5 * std::sqrt(2.0 - cb) + 1e-9);
    }
}

TEST_CASE("monster: separation between plain and Choi norms") {
    const MonsterInstance m = monster_build(8, 2, Seed{7, 0});
    const Separation s = monster_separation(m, 20, Seed{8, 0});
    CHECK(s.op_estimate <= 2.0 + 1e-12);
    CHECK(std::abs(s.gap - (s.cb_lower - s.op_estimate)) < 1e-15);
    CHECK(s.evaluations > 0);
}

TEST_CASE("anonymous-state instance") {
    CHECK_THROWS_AS(anonymous_state_protocol(1, 0.1, Seed{}), ConfigError);
    CHECK_THROWS_AS(anonymous_state_protocol(2, 1.5, Seed{}), ConfigError);
    const ProtocolDefinition p = anonymous_state_protocol(2, 0.0, Seed{9, 0});
    const SecurityReport r = nogo_analysis(p);
    CHECK(r.eps_upper <= 1e-8);
    CHECK(r.delta_hat <= 1e-8);

    const ProtocolDefinition far = anonymous_state_protocol(2, 1.0, Seed{9, 0});
    const SecurityReport rf = nogo_analysis(far);
    CHECK(rf.eps_lower <= rf.eps_upper + 1e-9);
    CHECK(rf.eps_lower > 0.1);
}
