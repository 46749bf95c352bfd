#include "qbc/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace qbc {

namespace {

Label child(const Label& x, int m) {
    Label y = x;
    y.push_back(m);
    return y;
}

int phase_rank(Phase p) { return static_cast<int>(p); }

double completeness_error(const Action& a, int in_dim) {
    CMatrix s = CMatrix::Zero(in_dim, in_dim);
    for (const auto& set : a.messages)
        for (const auto& k : set) s.noalias() += k.adjoint() * k;
    return (s - CMatrix::Identity(in_dim, in_dim)).cwiseAbs().maxCoeff();
}

bool stops(const CommunicationTree& tree, const Label& x, Stage stage) {
    if (!tree.is_node(x)) return true;
    const bool open = tree.node(x).phase == Phase::Open;
    switch (stage.kind) {
        case Stage::Commit:
            return open;
        case Stage::Final:
            return false;
        case Stage::Depth:
            return open || static_cast<int>(x.size()) >= stage.depth;
    }
    return true;
}

CMatrix basis_row(int d, int i) {
    CMatrix r = CMatrix::Zero(1, d);
    r(0, i) = 1.0;
    return r;
}

CVector pure_vector(const CMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(rho));
    const Eigen::Index n = rho.rows();
    if (es.eigenvalues()(n - 1) < 1.0 - 1e-9) throw DomainError("cheat synthesis needs a pure initial state");
    return es.eigenvectors().col(n - 1);
}

KrausSet prune_set(KrausSet set) {
    KrausSet out;
    for (auto& k : set)
        if (k.norm() > 1e-14) out.push_back(std::move(k));
    if (out.empty() && !set.empty()) out.push_back(CMatrix::Zero(set.front().rows(), set.front().cols()));
    return out;
}

double effect_expectation(const HybridState& s, const LeafVerifier& v, int bit) {
    double p = 0.0;
    for (const auto& [x, b] : s.branches()) {
        auto it = v.find(x);
        if (it == v.end()) continue;
        const CMatrix& e = bit == 0 ? it->second.accept0 : it->second.accept1;
        if (e.rows() != b.state.rows()) throw ShapeError("verifier effect at " + label_string(x) + " has the wrong dimension");
        p += b.weight * (b.state * e).trace().real();
    }
    return p;
}

StrategyRegister without_record(const StrategyRegister& reg) {
    StrategyRegister r = reg;
    r.entangled_record = false;
    return r;
}

}  // namespace

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Commit:
            return "commit";
        case Phase::Hold:
            return "hold";
        case Phase::Open:
            return "open";
    }
    return "commit";
}

Phase parse_phase(const std::string& s) {
    if (s == "commit") return Phase::Commit;
    if (s == "hold") return Phase::Hold;
    if (s == "open") return Phase::Open;
    throw ConfigError("unknown phase '" + s + "'");
}

void CommunicationTree::add(const Label& x, TreeNode node) { nodes_[x] = std::move(node); }

const TreeNode& CommunicationTree::node(const Label& x) const {
    auto it = nodes_.find(x);
    if (it == nodes_.end()) throw StructureError("no node " + label_string(x));
    return it->second;
}

void CommunicationTree::check() const {
    if (!is_node({})) throw StructureError("tree has no root node");
    if (node({}).owner != Party::Bob) throw StructureError("root node must belong to Bob");
    for (const auto& [x, n] : nodes_) {
        if (n.message_dims.empty()) throw StructureError("node " + label_string(x) + " has no messages");
        for (int d : n.message_dims)
            if (d < 1) throw StructureError("node " + label_string(x) + " has a message of dimension < 1");
        if (x.empty()) continue;
        const Label parent(x.begin(), x.end() - 1);
        if (!is_node(parent)) throw StructureError("node " + label_string(x) + " hangs below a leaf");
        const TreeNode& pn = node(parent);
        if (x.back() < 0 || x.back() >= static_cast<int>(pn.message_dims.size()))
            throw StructureError("node " + label_string(x) + " uses an unknown message symbol");
        if (pn.owner == n.owner) throw StructureError("owners do not alternate at node " + label_string(x));
        if (pn.phase == Phase::Open) throw StructureError("node " + label_string(x) + " follows an opening");
        if (phase_rank(n.phase) < phase_rank(pn.phase))
            throw StructureError("node " + label_string(x) + " returns to an earlier phase");
    }
}

std::vector<Label> CommunicationTree::commit_labels() const { return stage_labels(*this, Stage::commit()); }

std::vector<Label> CommunicationTree::final_labels() const { return stage_labels(*this, Stage::final_stage()); }

std::vector<Label> stage_labels(const CommunicationTree& tree, Stage stage) {
    std::vector<Label> out;
    std::function<void(const Label&)> visit = [&](const Label& x) {
        if (stops(tree, x, stage)) {
            out.push_back(x);
            return;
        }
        const auto& n = tree.node(x);
        for (int m = 0; m < static_cast<int>(n.message_dims.size()); ++m) visit(child(x, m));
    };
    visit({});
    return out;
}

bool Strategy::coherent() const {
    for (const auto& [x, a] : actions)
        for (const auto& set : a.messages)
            if (set.size() != 1) return false;
    return true;
}

std::map<Label, int> lab_dims(const CommunicationTree& tree, const Strategy& s) {
    std::map<Label, int> dims;
    std::function<void(const Label&, int)> visit = [&](const Label& x, int lab) {
        dims[x] = lab;
        if (!tree.is_node(x)) return;
        const TreeNode& n = tree.node(x);
        const Action* a = nullptr;
        if (n.owner == s.player) {
            auto it = s.actions.find(x);
            if (it == s.actions.end())
                throw StructureError(std::string(party_name(s.player)) + " has no action at node " + label_string(x));
            a = &it->second;
            if (a->messages.size() != n.message_dims.size())
                throw ShapeError("action at " + label_string(x) + " has the wrong number of messages");
        }
        for (int m = 0; m < static_cast<int>(n.message_dims.size()); ++m) {
            const int d = n.message_dims[m];
            int next = lab * d;
            if (a) {
                if (a->messages[m].empty())
                    throw ShapeError("empty Kraus set for message " + std::to_string(m) + " at " + label_string(x));
                next = static_cast<int>(a->messages[m].front().rows()) / d;
            }
            visit(child(x, m), next);
        }
    };
    visit({}, s.initial_dim);
    return dims;
}

Schedule validate(const CommunicationTree& tree, const Strategy& alice, const Strategy& bob, bool strict) {
    tree.check();
    if (alice.player != Party::Alice || bob.player != Party::Bob) throw StructureError("strategies have swapped roles");
    for (const Strategy* s : {&alice, &bob})
        for (const auto& [x, a] : s->actions)
            if (!tree.is_node(x) || tree.node(x).owner != s->player)
                throw StructureError(s->name + ": action at " + label_string(x) + " which is not a " +
                                     party_name(s->player) + " node");
    if (alice.initial_dim < 1 || bob.initial_dim < 1) throw ShapeError("initial lab dimensions must be positive");
    Schedule sch;
    std::function<void(const Label&, int, int, int, int)> visit = [&](const Label& x, int da, int db, int ca, int cb) {
        sch.dims[x] = {da, db};
        sch.canonical[x] = {ca, cb};
        if (da > ca) sch.alice_within = false;
        if (db > cb) sch.bob_within = false;
        if (!tree.is_node(x)) return;
        const TreeNode& n = tree.node(x);
        const Strategy& owner = n.owner == Party::Alice ? alice : bob;
        auto it = owner.actions.find(x);
        if (it == owner.actions.end())
            throw StructureError(owner.name + " (" + party_name(owner.player) + ") has no action at node " + label_string(x));
        const Action& a = it->second;
        const int lab = n.owner == Party::Alice ? da : db;
        if (a.messages.size() != n.message_dims.size())
            throw ShapeError("node " + label_string(x) + ": action has " + std::to_string(a.messages.size()) +
                             " messages, tree has " + std::to_string(n.message_dims.size()));
        for (std::size_t m = 0; m < a.messages.size(); ++m) {
            const auto& set = a.messages[m];
            const int d = n.message_dims[m];
            if (set.empty()) throw ShapeError("node " + label_string(x) + ": empty Kraus set for message " + std::to_string(m));
            const Eigen::Index rows = set.front().rows();
            for (const auto& k : set) {
                if (k.cols() != lab)
                    throw ShapeError("node " + label_string(x) + ": Kraus operator expects lab dimension " +
                                     std::to_string(k.cols()) + ", lab has " + std::to_string(lab));
                if (k.rows() != rows || rows % d != 0)
                    throw ShapeError("node " + label_string(x) + ": Kraus output does not split off message dimension " +
                                     std::to_string(d));
            }
        }
        const double err = completeness_error(a, lab);
        if (err > 1e-9)
            throw InvalidChannelError("node " + label_string(x) + ": Kraus completeness violated by " + std::to_string(err));
        for (int m = 0; m < static_cast<int>(n.message_dims.size()); ++m) {
            const int d = n.message_dims[m];
            const int out = static_cast<int>(a.messages[m].front().rows()) / d;
            if (n.owner == Party::Alice)
                visit(child(x, m), out, db * d, ca * d, cb * d);
            else
                visit(child(x, m), da * d, out, ca * d, cb * d);
        }
    };
    visit({}, alice.initial_dim, bob.initial_dim, alice.initial_dim, bob.initial_dim);
    if (strict) {
        if (alice.coherent() && !sch.alice_within) throw StructureError(alice.name + " exceeds the canonical lab schedule");
        if (bob.coherent() && !sch.bob_within) throw StructureError(bob.name + " exceeds the canonical lab schedule");
    }
    return sch;
}

RunResult run(const CommunicationTree& tree, const Strategy& alice, const Strategy& bob, const CMatrix& rho0,
              Stage stage, const RunOptions& opts) {
    const Schedule sch = validate(tree, alice, bob);
    const Eigen::Index n0 = static_cast<Eigen::Index>(alice.initial_dim) * bob.initial_dim;
    if (rho0.rows() != n0 || rho0.cols() != n0) throw ShapeError("initial state does not live on A0 x B0");
    RunResult res;
    std::vector<std::pair<Label, CMatrix>> frontier{{Label{}, rho0}};
    while (!frontier.empty()) {
        std::vector<std::pair<Label, CMatrix>> next;
        for (auto& [x, rho] : frontier) {
            if (stops(tree, x, stage)) {
                res.state.add_unnormalized(x, rho, opts.prune);
                if (res.state.contains(x)) res.dims[x] = sch.dims.at(x);
                continue;
            }
            const TreeNode& n = tree.node(x);
            const auto [da, db] = sch.dims.at(x);
            const Action& a = (n.owner == Party::Alice ? alice : bob).actions.at(x);
            for (int m = 0; m < static_cast<int>(a.messages.size()); ++m) {
                CMatrix out;
                for (const auto& k : a.messages[m]) {
                    const CMatrix op = n.owner == Party::Alice ? kron(k, identity(db)) : kron(identity(da), k);
                    const CMatrix term = op * rho * op.adjoint();
                    if (out.size() == 0)
                        out = term;
                    else
                        out += term;
                }
                if (out.trace().real() > opts.prune) next.emplace_back(child(x, m), std::move(out));
            }
            if (next.size() > opts.max_branches)
                throw ExplosionError("run exceeds " + std::to_string(opts.max_branches) + " branches");
        }
        frontier = std::move(next);
    }
    return res;
}

Purification purify(const CommunicationTree& tree, const Strategy& s) {
    if (s.notarized) throw PolicyError(s.name + " is notarized and may not be purified");
    Purification pu;
    pu.lab_dims = lab_dims(tree, s);
    pu.strategy.name = s.name + "^";
    pu.strategy.player = s.player;
    pu.strategy.initial_dim = s.initial_dim;
    std::function<void(const Label&, int)> visit = [&](const Label& x, int env) {
        pu.env_dims[x] = env;
        if (!tree.is_node(x)) return;
        const TreeNode& n = tree.node(x);
        if (n.owner != s.player) {
            for (int m = 0; m < static_cast<int>(n.message_dims.size()); ++m) visit(child(x, m), env);
            return;
        }
        const Action& a = s.actions.at(x);
        int fresh = 1;
        for (const auto& set : a.messages) fresh = std::max<int>(fresh, static_cast<int>(set.size()));
        const int lab = pu.lab_dims.at(x);
        Action pa;
        for (int m = 0; m < static_cast<int>(a.messages.size()); ++m) {
            const int d = n.message_dims[m];
            const int out = pu.lab_dims.at(child(x, m));
            const auto& set = a.messages[m];
            CMatrix v = CMatrix::Zero(static_cast<Eigen::Index>(fresh) * env * out * d, static_cast<Eigen::Index>(env) * lab);
            for (int k = 0; k < static_cast<int>(set.size()); ++k)
                for (int e = 0; e < env; ++e)
                    for (int o = 0; o < out; ++o)
                        for (int i = 0; i < d; ++i)
                            for (int c = 0; c < lab; ++c) {
                                if (s.player == Party::Alice)
                                    v(((static_cast<Eigen::Index>(k) * env + e) * out + o) * d + i, e * lab + c) =
                                        set[k](o * d + i, c);
                                else
                                    v(((static_cast<Eigen::Index>(i) * out + o) * env + e) * fresh + k, c * env + e) =
                                        set[k](i * out + o, c);
                            }
            pa.messages.push_back({v});
        }
        pu.strategy.actions[x] = std::move(pa);
        for (int m = 0; m < static_cast<int>(n.message_dims.size()); ++m) visit(child(x, m), env * fresh);
    };
    visit({}, 1);
    return pu;
}

KrausSet revert_kraus(Party p, int env_dim, int lab_dim) {
    KrausSet out;
    for (int e = 0; e < env_dim; ++e) {
        if (p == Party::Alice)
            out.push_back(kron(basis_row(env_dim, e), identity(lab_dim)));
        else
            out.push_back(kron(identity(lab_dim), basis_row(env_dim, e)));
    }
    return out;
}

int register_lab_factor(const StrategyRegister& reg) {
    const int r = static_cast<int>(reg.members.size());
    return reg.entangled_record ? r * r : r;
}

Strategy register_strategy(const CommunicationTree& tree, const StrategyRegister& reg) {
    if (reg.members.empty()) throw StructureError("strategy register is empty");
    std::vector<Strategy> members;
    for (const auto& s : reg.members) {
        if (s.player != Party::Bob) throw StructureError("register member " + s.name + " is not a Bob strategy");
        members.push_back(s.coherent() ? s : purify(tree, s).strategy);
    }
    const auto dims = lab_dims(tree, members.front());
    for (std::size_t i = 1; i < members.size(); ++i) {
        const auto di = lab_dims(tree, members[i]);
        for (const auto& [x, d] : dims)
            if (di.at(x) != d)
                throw StructureError("register members " + members.front().name + " and " + members[i].name +
                                     " differ in lab dimension at " + label_string(x));
    }
    const int r = static_cast<int>(members.size());
    const int rec = reg.entangled_record ? r : 1;
    Strategy out;
    out.name = reg.entangled_record ? "register+record" : "register";
    out.player = Party::Bob;
    out.initial_dim = members.front().initial_dim * r * rec;
    for (const auto& [x, a] : members.front().actions) {
        Action ra;
        for (std::size_t m = 0; m < a.messages.size(); ++m) {
            CMatrix op;
            for (int b = 0; b < r; ++b) {
                CMatrix sel = CMatrix::Zero(r, r);
                sel(b, b) = 1.0;
                const CMatrix term = kron(members[b].actions.at(x).messages[m].front(), kron(sel, identity(rec)));
                if (op.size() == 0)
                    op = term;
                else
                    op += term;
            }
            ra.messages.push_back({op});
        }
        out.actions[x] = std::move(ra);
    }
    return out;
}

Channel register_channel(const CommunicationTree& tree, const Strategy& alice, const StrategyRegister& reg,
                         const CMatrix& rho0, Stage stage) {
    StrategyRegister with_record = reg;
    with_record.entangled_record = true;
    const Strategy rb = register_strategy(tree, with_record);
    const int r = static_cast<int>(reg.members.size());
    const CVector omega = max_entangled(r);
    const RunResult rr = run(tree, alice, rb, kron(rho0, projector(omega)), stage);
    const HybridState bob = restrict_party(rr.state, Party::Bob, rr.dims);
    const auto bob_dims = lab_dims(tree, rb);
    std::vector<KrausBlock> blocks;
    for (const Label& x : stage_labels(tree, stage)) {
        const int out = bob_dims.at(x) / r;
        KrausBlock kb{x, out, {}};
        if (bob.contains(x)) {
            const Branch& br = bob.at(x);
            Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(br.weight * br.state));
            const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                const double lam = es.eigenvalues()(i);
                if (lam <= 1e-14 * std::max(top, 1e-300)) continue;
                CMatrix k(out, r);
                const double s = std::sqrt(lam * r);
                for (int o = 0; o < out; ++o)
                    for (int j = 0; j < r; ++j) k(o, j) = s * es.eigenvectors()(static_cast<Eigen::Index>(o) * r + j, i);
                kb.kraus.push_back(std::move(k));
            }
        }
        blocks.push_back(std::move(kb));
    }
    return Channel(r, std::move(blocks), true, 1e-8);
}

StinespringDilation commitment_dilation(const CommunicationTree& tree, const Strategy& alice, const Strategy& reg_bob,
                                        const CVector& psi0, int reg_dim) {
    if (!alice.coherent() || !reg_bob.coherent()) throw StructureError("commitment dilation needs coherent players");
    const Schedule sch = validate(tree, alice, reg_bob);
    if (psi0.size() * reg_dim != static_cast<Eigen::Index>(alice.initial_dim) * reg_bob.initial_dim)
        throw ShapeError("initial vector does not match the initial labs");
    std::map<Label, CMatrix> ops;
    std::function<void(const Label&, const CMatrix&)> visit = [&](const Label& x, const CMatrix& t) {
        if (stops(tree, x, Stage::commit())) {
            ops[x] = t;
            return;
        }
        const TreeNode& n = tree.node(x);
        const auto [da, db] = sch.dims.at(x);
        const Action& a = (n.owner == Party::Alice ? alice : reg_bob).actions.at(x);
        for (int m = 0; m < static_cast<int>(a.messages.size()); ++m) {
            const CMatrix& k = a.messages[m].front();
            const CMatrix op = n.owner == Party::Alice ? kron(k, identity(db)) : kron(identity(da), k);
            visit(child(x, m), op * t);
        }
    };
    CMatrix start = kron(CMatrix(psi0), identity(reg_dim));
    visit({}, start);
    StinespringDilation dil;
    Eigen::Index rows = 0;
    for (const Label& x : tree.commit_labels()) {
        const auto [da, db] = sch.dims.at(x);
        dil.blocks.push_back(DilationBlock{x, da, db});
        rows += static_cast<Eigen::Index>(da) * db;
    }
    dil.v = CMatrix::Zero(rows, reg_dim);
    const auto off = dil.offsets();
    for (std::size_t i = 0; i < dil.blocks.size(); ++i) dil.v.middleRows(off[i], ops.at(dil.blocks[i].label).rows()) = ops.at(dil.blocks[i].label);
    return dil;
}

double eps_lower_at(const ProtocolDefinition& p, Stage stage) {
    const Channel g0 = register_channel(p.tree, p.alice[0], p.bobs, p.rho0, stage);
    const Channel g1 = register_channel(p.tree, p.alice[1], p.bobs, p.rho0, stage);
    return cb_lower_choi(g0, g1);
}

double state_distance(const ProtocolDefinition& p, Stage stage) {
    double worst = 0.0;
    for (const auto& b : p.bobs.members) {
        const RunResult r0 = run(p.tree, p.alice[0], b, p.rho0, stage);
        const RunResult r1 = run(p.tree, p.alice[1], b, p.rho0, stage);
        const double d = hybrid_trace_distance(restrict_party(r0.state, Party::Bob, r0.dims),
                                               restrict_party(r1.state, Party::Bob, r1.dims));
        worst = std::max(worst, 0.5 * d);
    }
    return worst;
}

namespace {

struct Dilations {
    Purification pu0, pu1;
    StinespringDilation v0, v1;
};

Dilations build_dilations(const ProtocolDefinition& p) {
    Dilations d;
    d.pu0 = purify(p.tree, p.alice[0]);
    d.pu1 = purify(p.tree, p.alice[1]);
    const Strategy rb = register_strategy(p.tree, without_record(p.bobs));
    const int r = static_cast<int>(p.bobs.members.size());
    const CVector psi0 = pure_vector(p.rho0);
    d.v0 = commitment_dilation(p.tree, d.pu0.strategy, rb, psi0, r);
    d.v1 = commitment_dilation(p.tree, d.pu1.strategy, rb, psi0, r);
    return d;
}

}  // namespace

ConcealmentReport concealment(const ProtocolDefinition& p, const AlignOptions& opts) {
    ConcealmentReport rep;
    rep.eps_lower = eps_lower_at(p, Stage::commit());
    rep.state_distance = state_distance(p, Stage::commit());
    const Dilations d = build_dilations(p);
    rep.align = align_isometries(d.v0, d.v1, opts);
    rep.eps_upper = 2.0 * rep.align.value;
    return rep;
}

Strategy CheatPlan::strategy(int bit) const {
    Strategy s;
    s.name = "cheat" + std::to_string(bit);
    s.player = Party::Alice;
    s.initial_dim = initial_dim[bit];
    if (commit_actions) s.actions = *commit_actions;
    for (const auto& [x, a] : opening[bit]) s.actions[x] = a;
    return s;
}

CheatPlan CheatPlan::honest(const Strategy& a0, const Strategy& a1) {
    CheatPlan plan;
    plan.opening[0] = a0.actions;
    plan.opening[1] = a1.actions;
    plan.initial_dim = {a0.initial_dim, a1.initial_dim};
    return plan;
}

CheatPlan synthesize_cheat(const ProtocolDefinition& p, const AlignOptions& opts) {
    const Dilations d = build_dilations(p);
    CheatPlan plan;
    plan.align = align_isometries(d.v0, d.v1, opts);
    plan.unitaries = plan.align.unitaries;
    plan.initial_dim = {d.pu0.strategy.initial_dim, d.pu0.strategy.initial_dim};

    auto shared = std::make_shared<std::map<Label, Action>>();
    for (const auto& [x, a] : d.pu0.strategy.actions)
        if (p.tree.node(x).phase != Phase::Open) (*shared)[x] = a;
    plan.commit_actions = shared;

    for (std::size_t i = 0; i < d.v0.blocks.size(); ++i) {
        const Label& x = d.v0.blocks[i].label;
        plan.labels.push_back(x);
        if (!p.tree.is_node(x)) continue;
        if (p.tree.node(x).owner != Party::Alice) throw StructureError("opening at " + label_string(x) + " is not Alice's");
        const int e0 = d.pu0.env_dims.at(x), l0 = d.pu0.lab_dims.at(x);
        const int e1 = d.pu1.env_dims.at(x), l1 = d.pu1.lab_dims.at(x);
        const int dim0 = e0 * l0, dim1 = e1 * l1;
        const CMatrix& u = plan.unitaries[i];
        const int dpad = static_cast<int>(u.rows());
        const CMatrix rotated = u * CMatrix::Identity(dpad, dim0);

        // Bit 0: drop the purification and open honestly.
        const KrausSet rev0 = revert_kraus(Party::Alice, e0, l0);
        Action open0;
        for (const auto& set : p.alice[0].actions.at(x).messages) {
            KrausSet out;
            for (const auto& k : set)
                for (const auto& r : rev0) out.push_back(k * r);
            open0.messages.push_back(prune_set(std::move(out)));
        }
        plan.opening[0][x] = std::move(open0);

        // Bit 1: rotate into the other purification, discard what falls
        // outside its lab, then open as a1 would.
        KrausSet to_lab1{rotated.topRows(dim1)};
        for (int j = dim1; j < dpad; ++j) {
            CMatrix g = CMatrix::Zero(dim1, dim0);
            g.row(0) = rotated.row(j);
            to_lab1.push_back(std::move(g));
        }
        const KrausSet rev1 = revert_kraus(Party::Alice, e1, l1);
        Action open1;
        for (const auto& set : p.alice[1].actions.at(x).messages) {
            KrausSet out;
            for (const auto& k : set)
                for (const auto& r : rev1)
                    for (const auto& g : to_lab1) out.push_back(k * r * g);
            open1.messages.push_back(prune_set(std::move(out)));
        }
        plan.opening[1][x] = std::move(open1);
    }
    return plan;
}

SecurityReport evaluate_cheat(const ProtocolDefinition& p, const CheatPlan& plan) {
    SecurityReport rep;
    rep.align_value = plan.align.value;
    rep.converged = plan.align.converged;
    rep.padded = plan.align.padded;
    const bool verify = !p.verifier.per_bob.empty();
    if (verify && p.verifier.per_bob.size() != p.bobs.members.size())
        throw StructureError("verifier must list one leaf map per register member");
    const std::array<Strategy, 2> cheats{plan.strategy(0), plan.strategy(1)};

    auto outcome = [&](const std::string& name, const Strategy& bob, const CMatrix& rho0, const LeafVerifier* ver) {
        BobOutcome o;
        o.name = name;
        for (int i = 0; i < 2; ++i) {
            const RunResult h = run(p.tree, p.alice[i], bob, rho0, Stage::final_stage());
            const RunResult c = run(p.tree, cheats[i], bob, rho0, Stage::final_stage());
            const HybridState hb = restrict_party(h.state, Party::Bob, h.dims);
            const HybridState cb = restrict_party(c.state, Party::Bob, c.dims);
            o.distance[i] = hybrid_trace_distance(hb, cb);
            if (ver) {
                o.honest_accept[i] = effect_expectation(hb, *ver, i);
                o.cheat_accept[i] = effect_expectation(cb, *ver, i);
            } else {
                o.honest_accept[i] = o.cheat_accept[i] = std::numeric_limits<double>::quiet_NaN();
            }
        }
        return o;
    };

    for (std::size_t b = 0; b < p.bobs.members.size(); ++b)
        rep.per_bob.push_back(outcome(p.bobs.members[b].name, p.bobs.members[b], p.rho0,
                                      verify ? &p.verifier.per_bob[b] : nullptr));

    StrategyRegister rec = p.bobs;
    rec.entangled_record = true;
    const Strategy rb = register_strategy(p.tree, rec);
    const int r = static_cast<int>(p.bobs.members.size());
    LeafVerifier controlled;
    if (verify) {
        for (const Label& x : p.tree.final_labels()) {
            Effects e;
            bool any = false;
            for (int b = 0; b < r; ++b) {
                auto it = p.verifier.per_bob[b].find(x);
                if (it == p.verifier.per_bob[b].end()) continue;
                any = true;
                CMatrix sel = CMatrix::Zero(r, r);
                sel(b, b) = 1.0;
                const CMatrix c0 = kron(it->second.accept0, kron(sel, identity(r)));
                const CMatrix c1 = kron(it->second.accept1, kron(sel, identity(r)));
                e.accept0 = e.accept0.size() ? CMatrix(e.accept0 + c0) : c0;
                e.accept1 = e.accept1.size() ? CMatrix(e.accept1 + c1) : c1;
            }
            if (any) controlled[x] = e;
        }
    }
    rep.per_bob.push_back(outcome(rb.name, rb, kron(p.rho0, projector(max_entangled(r))), verify ? &controlled : nullptr));

    for (const auto& o : rep.per_bob) {
        for (int i = 0; i < 2; ++i) {
            rep.delta_hat = std::max(rep.delta_hat, 0.5 * o.distance[i]);
            if (verify) {
                rep.eta = std::max(rep.eta, 1.0 - o.honest_accept[i]);
                rep.accept_gap = std::max(rep.accept_gap, std::abs(o.cheat_accept[i] - o.honest_accept[i]));
            }
        }
    }
    if (!verify) rep.eta = rep.accept_gap = std::numeric_limits<double>::quiet_NaN();
    return rep;
}

SecurityReport nogo_analysis(const ProtocolDefinition& p, const AlignOptions& opts) {
    const CheatPlan plan = synthesize_cheat(p, opts);
    SecurityReport rep = evaluate_cheat(p, plan);
    rep.eps_lower = eps_lower_at(p, Stage::commit());
    rep.eps_upper = 2.0 * plan.align.value;
    rep.state_distance = state_distance(p, Stage::commit());
    return rep;
}

}  // namespace qbc
