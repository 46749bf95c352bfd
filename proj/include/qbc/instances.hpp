#pragma once

#include <vector>

#include "qbc/channels.hpp"
#include "qbc/protocol.hpp"

namespace qbc {

// Alice sends half of one of two orthogonal Bell states and opens by sending
// the other half. S holds two identical dummy Bobs.
ProtocolDefinition bell_protocol();

// Bob sends half of a Haar-random state on K x B, Alice encodes the bit by
// conjugating K with U0 = 1 or U1 = diag(exp(2 pi i j leak / d)) and returns
// it; the opening is a classical claim. S holds `members` Haar states.
ProtocolDefinition anonymous_state_protocol(int d, double leak, Seed seed, int members = 2);

struct ShredderInstance {
    int d = 0;
    std::vector<CVector> e, f;
    CMatrix rho0, rho1;  // on Alice x Bob
    CMatrix p0, p1;      // verifier projectors d * rho_k
};

ShredderInstance shredder_build(int d);

struct ShredderOutcome {
    double success_as_1 = 0.0;  // committed 0, opened 1
    double success_as_0 = 0.0;  // committed 1, opened 0
};

// Alice applies t to her retained factor before the opening.
ShredderOutcome shredder_eval(const ShredderInstance& inst, const Channel& t);
// Largest deviation of Bob's marginals from I/d.
double shredder_marginal_error(const ShredderInstance& inst);

struct MonsterInstance {
    int d = 0;
    int mu = 0;
    Seed seed;
    Channel randomizing;
    Channel depolarizing;
    // Dilations with Alice factors padded to a common dimension.
    StinespringDilation v0, v1;
    int dim_a = 0;
};

MonsterInstance monster_build(int d, int mu, Seed seed);

struct PassiveCheat {
    double probability = 0.0;
    double channel_fidelity = 0.0;  // of A -> K A K^dag with K = V0^dag V1
    double cb_lower = 0.0;
    double delta_hat = 0.0;          // 2 - cb_lower
    // cb_lower <= 2 sqrt(1 - Fc) <= 2 sqrt(1 - P + 1/d)
    double chain_mid = 0.0;
    double chain_right = 0.0;
    bool chain_holds = false;
    bool bound_holds = false;  // P <= 1/d + delta_hat
};

PassiveCheat monster_passive_cheat(const MonsterInstance& inst, double tol = 1e-9);

// Commit-phase channel d -> A' x B (A' slowest) and opening channels
// A' -> A for each claimed bit.
struct MonsterAttack {
    Channel commit;
    int retained_dim = 0;
    std::array<Channel, 2> open;
};

struct AttackOutcome {
    std::array<double, 2> accept{};
    double probability = 0.0;  // mean of the two
    double bound = 0.0;        // 1/2 + 1/d + sqrt(delta_hat)/2
    bool within = false;
};

MonsterAttack monster_honest_attack(const MonsterInstance& inst);
MonsterAttack monster_passive_attack(const MonsterInstance& inst);
MonsterAttack monster_random_attack(const MonsterInstance& inst, int retained_dim, Rng& rng);
AttackOutcome monster_general_attack(const MonsterInstance& inst, const MonsterAttack& attack, double cb_lower,
                                     double tol = 1e-9);

// Haar-averaged acceptance when Alice honestly committed to bit k and opens k.
double monster_honest_acceptance(const MonsterInstance& inst, int k);

struct Separation {
    double cb_lower = 0.0;
    double op_estimate = 0.0;
    double gap = 0.0;
    int evaluations = 0;
};

Separation monster_separation(const MonsterInstance& inst, int trials, Seed seed);

}  // namespace qbc
