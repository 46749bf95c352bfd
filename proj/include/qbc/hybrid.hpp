#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qbc/numerics.hpp"

namespace qbc {

// Path of message symbols from the root of a communication tree.
using Label = std::vector<int>;

std::string label_string(const Label& x);

enum class Party { Alice, Bob };

const char* party_name(Party p);

struct Branch {
    double weight = 0.0;
    CMatrix state;  // normalized density matrix
};

// Direct sum of weighted branch states. Weights and normalized states are
// kept separately; branches of zero weight are dropped.
class HybridState {
public:
    static constexpr double kWeightTol = 1e-9;

    HybridState() = default;
    static HybridState single(const CMatrix& rho, Label label = {});

    // Adds an unnormalized branch operator; its trace becomes the weight.
    void add_unnormalized(const Label& x, const CMatrix& m, double prune = 0.0);
    void add(const Label& x, double weight, const CMatrix& rho);

    const std::map<Label, Branch>& branches() const { return branches_; }
    double total_weight() const;
    void check_normalized(double tol = kWeightTol) const;
    bool contains(const Label& x) const { return branches_.count(x) != 0; }
    const Branch& at(const Label& x) const;

private:
    std::map<Label, Branch> branches_;
};

using HybridOperator = std::map<Label, CMatrix>;

// Per-branch split of the branch space into Alice's and Bob's factors.
using BranchDims = std::map<Label, std::pair<int, int>>;

cplx hybrid_expectation(const HybridState& s, const HybridOperator& f);
double hybrid_trace_distance(const HybridState& s, const HybridState& t);
HybridState restrict_party(const HybridState& s, Party side, const BranchDims& dims);

}  // namespace qbc
