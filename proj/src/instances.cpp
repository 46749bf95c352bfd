#include "qbc/instances.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qbc {

namespace {

CMatrix scalar(double v) { return CMatrix::Constant(1, 1, v); }

Action claim(int k, const CMatrix& keep) {
    Action a;
    for (int m = 0; m < 2; ++m) a.messages.push_back({m == k ? keep : CMatrix(CMatrix::Zero(keep.rows(), keep.cols()))});
    return a;
}

Strategy bob_member(const std::string& name, const CMatrix& first, int hold_dim) {
    Strategy b;
    b.name = name;
    b.player = Party::Bob;
    b.actions[{}] = Action{{{first}}};
    b.actions[{0, 0}] = Action{{{identity(hold_dim)}}};
    return b;
}

}  // namespace

ProtocolDefinition bell_protocol() {
    ProtocolDefinition p;
    p.name = "bell";
    p.tree.add({}, TreeNode{Party::Bob, Phase::Commit, {1}});
    p.tree.add({0}, TreeNode{Party::Alice, Phase::Commit, {2}});
    p.tree.add({0, 0}, TreeNode{Party::Bob, Phase::Hold, {1}});
    p.tree.add({0, 0, 0}, TreeNode{Party::Alice, Phase::Open, {2, 2}});

    std::array<CVector, 2> bell;
    for (int k = 0; k < 2; ++k) {
        bell[k] = CVector::Zero(4);
        bell[k](0) = 1.0 / std::sqrt(2.0);
        bell[k](3) = (k == 0 ? 1.0 : -1.0) / std::sqrt(2.0);
    }
    for (int k = 0; k < 2; ++k) {
        Strategy& a = p.alice[k];
        a.name = "bell" + std::to_string(k);
        a.player = Party::Alice;
        a.actions[{0}] = Action{{{CMatrix(bell[k])}}};
        a.actions[{0, 0, 0}] = claim(k, identity(2));
    }
    for (int b = 0; b < 2; ++b) p.bobs.members.push_back(bob_member("dummy" + std::to_string(b), scalar(1.0), 2));
    p.rho0 = scalar(1.0);

    LeafVerifier v;
    for (int m = 0; m < 2; ++m) {
        Effects e;
        const CMatrix zero = CMatrix::Zero(4, 4);
        e.accept0 = m == 0 ? projector(bell[0]) : zero;
        e.accept1 = m == 1 ? projector(bell[1]) : zero;
        v[{0, 0, 0, m}] = e;
    }
    p.verifier.per_bob = {v, v};
    return p;
}

ProtocolDefinition anonymous_state_protocol(int d, double leak, Seed seed, int members) {
    if (d < 2) throw ConfigError("anonymous-state protocol needs d >= 2");
    if (!(leak >= 0.0 && leak <= 1.0)) throw ConfigError("leak must lie in [0, 1]");
    if (members < 1) throw ConfigError("anonymous-state protocol needs at least one Bob strategy");
    ProtocolDefinition p;
    p.name = "anon";
    p.tree.add({}, TreeNode{Party::Bob, Phase::Commit, {d}});
    p.tree.add({0}, TreeNode{Party::Alice, Phase::Commit, {d}});
    p.tree.add({0, 0}, TreeNode{Party::Bob, Phase::Hold, {1}});
    p.tree.add({0, 0, 0}, TreeNode{Party::Alice, Phase::Open, {1, 1}});

    std::array<CMatrix, 2> enc{identity(d), CMatrix::Zero(d, d)};
    for (int j = 0; j < d; ++j) enc[1](j, j) = std::polar(1.0, 2.0 * kPi * j * leak / d);
    for (int k = 0; k < 2; ++k) {
        Strategy& a = p.alice[k];
        a.name = "encode" + std::to_string(k);
        a.player = Party::Alice;
        a.actions[{0}] = Action{{{enc[k]}}};
        a.actions[{0, 0, 0}] = claim(k, scalar(1.0));
    }
    p.rho0 = scalar(1.0);
    for (int b = 0; b < members; ++b) {
        Rng rng = seed.child(b).rng();
        const CVector phi = haar_state(d * d, rng);
        p.bobs.members.push_back(bob_member("haar" + std::to_string(b), CMatrix(phi), d * d));
        LeafVerifier v;
        for (int m = 0; m < 2; ++m) {
            const CMatrix accept = projector(kron(enc[m], identity(d)) * phi);
            const CMatrix zero = CMatrix::Zero(d * d, d * d);
            v[{0, 0, 0, m}] = Effects{m == 0 ? accept : zero, m == 1 ? accept : zero};
        }
        p.verifier.per_bob.push_back(std::move(v));
    }
    return p;
}

ShredderInstance shredder_build(int d) {
    ShredderInstance s;
    s.d = d;
    const MubPair mub = fourier_mub(d);
    s.e = mub.e;
    s.f = mub.f;
    s.rho0 = CMatrix::Zero(d * d, d * d);
    s.rho1 = CMatrix::Zero(d * d, d * d);
    for (int j = 0; j < d; ++j) {
        s.rho0 += projector(kron(s.e[j], s.e[j]));
        s.rho1 += projector(kron(s.f[j], CVector(s.f[j].conjugate())));
    }
    s.rho0 /= d;
    s.rho1 /= d;
    s.p0 = d * s.rho0;
    s.p1 = d * s.rho1;
    return s;
}

ShredderOutcome shredder_eval(const ShredderInstance& inst, const Channel& t) {
    if (t.in_dim() != inst.d || t.out_dim() != inst.d) throw ShapeError("shredder cheat must map C^d to C^d");
    const Channel cheat = tensor(flatten(t), Channel::identity(inst.d));
    ShredderOutcome o;
    o.success_as_1 = (inst.p1 * apply_map(cheat, inst.rho0)).trace().real();
    o.success_as_0 = (inst.p0 * apply_map(cheat, inst.rho1)).trace().real();
    return o;
}

double shredder_marginal_error(const ShredderInstance& inst) {
    const CMatrix mixed = identity(inst.d) / static_cast<double>(inst.d);
    double worst = 0.0;
    for (const CMatrix* r : {&inst.rho0, &inst.rho1}) {
        const CMatrix bob = partial_trace(*r, {inst.d, inst.d}, {1});
        worst = std::max(worst, (bob - mixed).cwiseAbs().maxCoeff());
    }
    return worst;
}

MonsterInstance monster_build(int d, int mu, Seed seed) {
    if (d < 2 || mu < 1) throw ConfigError("monster instance needs d >= 2 and mu >= 1");
    MonsterInstance m;
    m.d = d;
    m.mu = mu;
    m.seed = seed;
    m.randomizing = randomizing_channel(d, mu, seed);
    m.depolarizing = depolarizing(d);
    m.dim_a = std::max(mu, d * d);
    m.v0 = pad_alice(stinespring(m.randomizing), {m.dim_a});
    m.v1 = pad_alice(stinespring(m.depolarizing), {m.dim_a});
    return m;
}

PassiveCheat monster_passive_cheat(const MonsterInstance& inst, double tol) {
    const int d = inst.d;
    const CMatrix k = inst.v0.v.adjoint() * inst.v1.v;
    const cplx tr = k.trace();
    PassiveCheat pc;
    const Channel overlap(d, {KrausBlock{{}, d, {k}}}, false);
    pc.probability = average_fidelity_exact(overlap);
    pc.channel_fidelity = std::norm(tr) / (static_cast<double>(d) * d);
    pc.cb_lower = cb_lower_choi(inst.randomizing, inst.depolarizing);
    pc.delta_hat = 2.0 - pc.cb_lower;
    pc.chain_mid = 2.0 * std::sqrt(std::max(0.0, 1.0 - pc.channel_fidelity));
    pc.chain_right = 2.0 * std::sqrt(std::max(0.0, 1.0 - pc.probability + 1.0 / d));
    pc.chain_holds = pc.cb_lower <= pc.chain_mid + tol && pc.chain_mid <= pc.chain_right + tol;
    pc.bound_holds = pc.probability <= 1.0 / d + pc.delta_hat + tol;
    return pc;
}

MonsterAttack monster_honest_attack(const MonsterInstance& inst) {
    MonsterAttack a;
    a.commit = Channel::from_kraus({inst.v0.v});
    a.retained_dim = inst.dim_a;
    a.open = {Channel::identity(inst.dim_a), Channel::identity(inst.dim_a)};
    return a;
}

MonsterAttack monster_passive_attack(const MonsterInstance& inst) {
    MonsterAttack a = monster_honest_attack(inst);
    a.commit = Channel::from_kraus({inst.v1.v});
    return a;
}

MonsterAttack monster_random_attack(const MonsterInstance& inst, int retained_dim, Rng& rng) {
    std::uniform_int_distribution<int> count(1, 3);
    MonsterAttack a;
    a.retained_dim = retained_dim;
    a.commit = random_channel(inst.d, retained_dim * inst.d, count(rng), rng);
    for (auto& o : a.open) o = random_channel(retained_dim, inst.dim_a, count(rng), rng);
    return a;
}

AttackOutcome monster_general_attack(const MonsterInstance& inst, const MonsterAttack& attack, double cb_lower,
                                     double tol) {
    const int d = inst.d;
    if (attack.commit.in_dim() != d || attack.commit.out_dim() != attack.retained_dim * d)
        throw ShapeError("commit-phase attack must map C^d to A' x B");
    AttackOutcome out;
    const std::array<const StinespringDilation*, 2> v{&inst.v0, &inst.v1};
    const auto commit = attack.commit.flat_kraus();
    for (int k = 0; k < 2; ++k) {
        const Channel& open = attack.open[k];
        if (open.in_dim() != attack.retained_dim || open.out_dim() != inst.dim_a)
            throw ShapeError("opening attack must map A' to the dilation's Alice factor");
        std::vector<CMatrix> kraus;
        for (const auto& mj : open.flat_kraus()) {
            const CMatrix lifted = v[k]->v.adjoint() * kron(mj, identity(d));
            for (const auto& ni : commit) kraus.push_back(lifted * ni);
        }
        out.accept[k] = average_fidelity_exact(Channel(d, {KrausBlock{{}, d, std::move(kraus)}}, false));
    }
    out.probability = 0.5 * (out.accept[0] + out.accept[1]);
    out.bound = 0.5 + 1.0 / d + 0.5 * std::sqrt(std::max(0.0, 2.0 - cb_lower));
    out.within = out.probability <= out.bound + tol;
    return out;
}

double monster_honest_acceptance(const MonsterInstance& inst, int k) {
    const CMatrix& v = k == 0 ? inst.v0.v : inst.v1.v;
    const CMatrix gram = v.adjoint() * v;
    return average_fidelity_exact(Channel(inst.d, {KrausBlock{{}, inst.d, {gram}}}, false));
}

Separation monster_separation(const MonsterInstance& inst, int trials, Seed seed) {
    Separation s;
    s.cb_lower = cb_lower_choi(inst.randomizing, inst.depolarizing);
    const NormEstimate est = op_norm_estimate(inst.randomizing, inst.depolarizing, trials, seed);
    s.op_estimate = est.value;
    s.evaluations = est.evaluations;
    s.gap = s.cb_lower - s.op_estimate;
    return s;
}

}  // namespace qbc
