#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qbc/align.hpp"
#include "qbc/channels.hpp"
#include "qbc/hybrid.hpp"

namespace qbc {

enum class Phase { Commit, Hold, Open };

const char* phase_name(Phase p);
Phase parse_phase(const std::string& s);

struct TreeNode {
    Party owner = Party::Bob;
    Phase phase = Phase::Commit;
    std::vector<int> message_dims;  // one entry per message symbol 0..k-1
};

// Tree of message histories. Labels present in the map are decision
// nodes; children that are absent are leaves. Children of an Open node are
// the final leaves of an opening.
class CommunicationTree {
public:
    void add(const Label& x, TreeNode node);
    const std::map<Label, TreeNode>& nodes() const { return nodes_; }
    bool is_node(const Label& x) const { return nodes_.count(x) != 0; }
    const TreeNode& node(const Label& x) const;

    // Throws StructureError naming the offending node.
    void check() const;

    // Labels at which the commitment phase has ended: Open nodes and leaves
    // reached before any opening.
    std::vector<Label> commit_labels() const;
    std::vector<Label> final_labels() const;

private:
    std::map<Label, TreeNode> nodes_;
};

using KrausSet = std::vector<CMatrix>;

// Owner's operation at one node: a Kraus set per message symbol. Alice's
// operators map her lab into (new lab) x (message); Bob's map his lab into
// (message) x (new lab). With this layout the global ordering stays
// Alice x Bob after the message changes hands.
struct Action {
    std::vector<KrausSet> messages;
};

struct Strategy {
    std::string name;
    Party player = Party::Alice;
    int initial_dim = 1;
    std::map<Label, Action> actions;
    // Literal preparation vouched for by a third party; may not be purified.
    bool notarized = false;

    bool coherent() const;
};

struct Schedule {
    std::map<Label, std::pair<int, int>> dims;       // (Alice, Bob) lab dims at every label
    std::map<Label, std::pair<int, int>> canonical;  // dimension-bound schedule
    bool alice_within = true;
    bool bob_within = true;
};

// Checks strategy shapes and completeness against the tree. With strict set,
// coherent strategies whose labs exceed the canonical schedule are rejected.
Schedule validate(const CommunicationTree& tree, const Strategy& alice, const Strategy& bob, bool strict = false);

// Lab dimension of one player at every label of the tree.
std::map<Label, int> lab_dims(const CommunicationTree& tree, const Strategy& s);

struct Stage {
    enum Kind { Commit, Final, Depth };
    Kind kind = Commit;
    int depth = 0;

    static Stage commit() { return {Commit, 0}; }
    static Stage final_stage() { return {Final, 0}; }
    // Stops after the given number of rounds, or earlier at the end of the
    // commitment phase.
    static Stage at_depth(int d) { return {Depth, d}; }
};

struct RunOptions {
    std::size_t max_branches = 10000;
    double prune = 1e-15;
};

struct RunResult {
    HybridState state;
    BranchDims dims;
};

// Branchwise forward simulation from rho0 on A0 x B0.
RunResult run(const CommunicationTree& tree, const Strategy& alice, const Strategy& bob, const CMatrix& rho0,
              Stage stage, const RunOptions& opts = {});

struct Purification {
    Strategy strategy;
    // Environment dimension at every label. Alice keeps it in front of her
    // lab (env x lab), Bob behind his (lab x env).
    std::map<Label, int> env_dims;
    std::map<Label, int> lab_dims;  // lab dims of the original strategy
};

// Locally coherent version of s: every Kraus set becomes one isometry block
// by recording the Kraus index in a fresh environment factor.
Purification purify(const CommunicationTree& tree, const Strategy& s);

// Kraus operators tracing out the environment of a purified lab.
KrausSet revert_kraus(Party p, int env_dim, int lab_dim);

struct StrategyRegister {
    std::vector<Strategy> members;
    bool entangled_record = false;
};

// Bob playing every member coherently, controlled by a register of
// dimension |S| (plus a record copy when entangled_record is set). His lab
// is B x Reg (x Record).
Strategy register_strategy(const CommunicationTree& tree, const StrategyRegister& reg);
int register_lab_factor(const StrategyRegister& reg);

// Bob's view at the given stage as a channel from register states to the
// hybrid state over the stage labels (blocks of dimension B_x |S|).
Channel register_channel(const CommunicationTree& tree, const Strategy& alice, const StrategyRegister& reg,
                         const CMatrix& rho0, Stage stage = Stage::commit());

// Isometry from the register into the sum over commit labels of
// A_x x (B_x x Reg) for coherent players and a pure initial state.
StinespringDilation commitment_dilation(const CommunicationTree& tree, const Strategy& alice, const Strategy& reg_bob,
                                        const CVector& psi0, int reg_dim);

struct Effects {
    CMatrix accept0;
    CMatrix accept1;  // reject is the complement
};

using LeafVerifier = std::map<Label, Effects>;

// Verification measurement per member of the strategy register.
struct Verifier {
    std::vector<LeafVerifier> per_bob;
};

struct ProtocolDefinition {
    std::string name;
    CommunicationTree tree;
    std::array<Strategy, 2> alice;
    StrategyRegister bobs;
    CMatrix rho0;
    Verifier verifier;
};

struct ConcealmentReport {
    double eps_lower = 0.0;  // Choi probe of the register channels
    double eps_upper = 0.0;  // twice the alignment value
    double state_distance = 0.0;  // half max trace distance over members of S
    AlignResult align;
};

ConcealmentReport concealment(const ProtocolDefinition& p, const AlignOptions& opts = {});
double eps_lower_at(const ProtocolDefinition& p, Stage stage);

// Commitment-phase play shared by both bit values plus per-bit openings.
struct CheatPlan {
    std::shared_ptr<const std::map<Label, Action>> commit_actions;
    std::array<std::map<Label, Action>, 2> opening;
    std::array<int, 2> initial_dim{1, 1};
    std::vector<Label> labels;
    std::vector<CMatrix> unitaries;
    AlignResult align;

    Strategy strategy(int bit) const;
    static CheatPlan honest(const Strategy& a0, const Strategy& a1);
};

CheatPlan synthesize_cheat(const ProtocolDefinition& p, const AlignOptions& opts = {});

struct BobOutcome {
    std::string name;
    std::array<double, 2> distance{};        // trace distance of Bob's finals, cheat vs honest
    std::array<double, 2> honest_accept{};   // P(accept bit i | honest a_i)
    std::array<double, 2> cheat_accept{};    // P(accept bit i | cheat for bit i)
};

struct SecurityReport {
    double eps_lower = 0.0;
    double eps_upper = 0.0;
    double state_distance = 0.0;
    double delta_hat = 0.0;
    double eta = 0.0;
    double accept_gap = 0.0;
    double align_value = 0.0;
    bool converged = true;
    bool padded = false;
    std::vector<BobOutcome> per_bob;
};

// Runs both cheat branches against every member of S and against the
// register Bob with an entangled record. eps fields are left at zero.
SecurityReport evaluate_cheat(const ProtocolDefinition& p, const CheatPlan& plan);

// Half the largest trace distance between Bob's states under a0 and a1.
double state_distance(const ProtocolDefinition& p, Stage stage = Stage::commit());

// Concealment bounds, cheat synthesis and cheat evaluation in one pass.
SecurityReport nogo_analysis(const ProtocolDefinition& p, const AlignOptions& opts = {});

// Labels at which a run to the given stage stops.
std::vector<Label> stage_labels(const CommunicationTree& tree, Stage stage);

}  // namespace qbc
