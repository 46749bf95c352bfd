#include "qbc/hybrid.hpp"

#include <set>
#include <sstream>

namespace qbc {

std::string label_string(const Label& x) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
    os << ']';
    return os.str();
}

const char* party_name(Party p) { return p == Party::Alice ? "alice" : "bob"; }

HybridState HybridState::single(const CMatrix& rho, Label label) {
    HybridState s;
    s.add(label, 1.0, rho);
    return s;
}

void HybridState::add_unnormalized(const Label& x, const CMatrix& m, double prune) {
    const double w = m.trace().real();
    if (w <= prune || w <= 0.0) return;
    add(x, w, m / w);
}

void HybridState::add(const Label& x, double weight, const CMatrix& rho) {
    if (weight <= 0.0) return;
    auto it = branches_.find(x);
    if (it == branches_.end()) {
        branches_.emplace(x, Branch{weight, hermitian_part(rho)});
        return;
    }
    Branch& b = it->second;
    if (b.state.rows() != rho.rows()) throw StructureError("branch " + label_string(x) + " dimension mismatch");
    const double w = b.weight + weight;
    b.state = hermitian_part((b.weight * b.state + weight * rho) / w);
    b.weight = w;
}

double HybridState::total_weight() const {
    double w = 0.0;
    for (const auto& [x, b] : branches_) w += b.weight;
    return w;
}

void HybridState::check_normalized(double tol) const {
    const double w = total_weight();
    if (std::abs(w - 1.0) > tol) throw DomainError("hybrid state weights sum to " + std::to_string(w));
}

const Branch& HybridState::at(const Label& x) const {
    auto it = branches_.find(x);
    if (it == branches_.end()) throw StructureError("no branch " + label_string(x));
    return it->second;
}

cplx hybrid_expectation(const HybridState& s, const HybridOperator& f) {
    cplx acc = 0.0;
    for (const auto& [x, b] : s.branches()) {
        auto it = f.find(x);
        if (it == f.end()) throw StructureError("operator has no block for label " + label_string(x));
        if (it->second.rows() != b.state.rows() || it->second.cols() != b.state.cols())
            throw StructureError("operator block " + label_string(x) + " has the wrong dimension");
        acc += b.weight * (b.state * it->second).trace();
    }
    for (const auto& [x, m] : f) {
        if (!s.contains(x)) throw StructureError("state has no branch for operator label " + label_string(x));
    }
    return acc;
}

double hybrid_trace_distance(const HybridState& s, const HybridState& t) {
    std::set<Label> labels;
    for (const auto& [x, b] : s.branches()) labels.insert(x);
    for (const auto& [x, b] : t.branches()) labels.insert(x);
    double total = 0.0;
    for (const Label& x : labels) {
        const bool in_s = s.contains(x), in_t = t.contains(x);
        if (in_s && in_t) {
            const Branch& a = s.at(x);
            const Branch& b = t.at(x);
            if (a.state.rows() != b.state.rows()) throw StructureError("branch " + label_string(x) + " dims differ");
            total += trace_norm(a.weight * a.state - b.weight * b.state);
        } else {
            total += in_s ? s.at(x).weight : t.at(x).weight;
        }
    }
    return total;
}

HybridState restrict_party(const HybridState& s, Party side, const BranchDims& dims) {
    HybridState out;
    for (const auto& [x, b] : s.branches()) {
        auto it = dims.find(x);
        if (it == dims.end()) throw StructureError("no factorization for branch " + label_string(x));
        const auto [da, db] = it->second;
        if (static_cast<Eigen::Index>(da) * db != b.state.rows())
            throw StructureError("branch " + label_string(x) + " does not factor as " + std::to_string(da) + "x" +
                                 std::to_string(db));
        const int keep = side == Party::Alice ? 0 : 1;
        out.add(x, b.weight, partial_trace(b.state, {da, db}, {keep}));
    }
    return out;
}

}  // namespace qbc
