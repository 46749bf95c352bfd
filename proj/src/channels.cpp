#include "qbc/channels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qbc {

namespace {

CMatrix completeness_sum(int in_dim, const std::vector<KrausBlock>& blocks) {
    CMatrix s = CMatrix::Zero(in_dim, in_dim);
    for (const auto& b : blocks)
        for (const auto& k : b.kraus) s.noalias() += k.adjoint() * k;
    return s;
}

// Row-major flattening of K / sqrt(d): the vector (K x 1)|Omega>.
CVector choi_vector(const CMatrix& k) {
    const Eigen::Index r = k.rows(), c = k.cols();
    CVector v(r * c);
    const double s = 1.0 / std::sqrt(static_cast<double>(c));
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) v(i * c + j) = s * k(i, j);
    return v;
}

CMatrix sign_matrix(const CMatrix& y, double* norm) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(y));
    const RVector& ev = es.eigenvalues();
    RVector s(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) s(i) = ev(i) >= 0 ? 1.0 : -1.0;
    if (norm) *norm = ev.cwiseAbs().sum();
    return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

CVector top_eigenvector(const CMatrix& z) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(z));
    return es.eigenvectors().col(es.eigenvalues().size() - 1);
}

// Monotone ascent of psi -> ||forward(psi)||_1: the sign matrix of the
// current output fixes a linear functional, whose best input is the top
// eigenvector of its adjoint image.
NormEstimate sign_ascent(const std::function<CMatrix(const CVector&)>& forward,
                         const std::function<CMatrix(const CMatrix&)>& adjoint, CVector psi, double tol, int max_iter) {
    NormEstimate best;
    double value = 0.0;
    CMatrix s = sign_matrix(forward(psi), &value);
    best.value = value;
    best.witness = psi;
    best.evaluations = 1;
    for (int it = 0; it < max_iter; ++it) {
        CVector next = top_eigenvector(adjoint(s));
        double next_value = 0.0;
        CMatrix next_s = sign_matrix(forward(next), &next_value);
        ++best.evaluations;
        if (next_value > best.value) {
            best.value = next_value;
            best.witness = next;
        }
        const bool small = next_value - value < tol;
        psi = next;
        s = next_s;
        value = next_value;
        if (small) break;
    }
    return best;
}

}  // namespace

Channel::Channel(int in_dim, std::vector<KrausBlock> blocks, bool trace_preserving, double tol)
    : in_dim_(in_dim), blocks_(std::move(blocks)), trace_preserving_(trace_preserving) {
    if (in_dim_ < 1) throw ShapeError("channel input dimension must be positive");
    if (blocks_.empty()) throw ShapeError("channel needs at least one output block");
    for (const auto& b : blocks_) {
        if (b.out_dim < 1) throw ShapeError("output block " + label_string(b.label) + " has no dimension");
        for (const auto& k : b.kraus) {
            if (k.rows() != b.out_dim || k.cols() != in_dim_)
                throw ShapeError("Kraus operator in block " + label_string(b.label) + " has shape " +
                                 std::to_string(k.rows()) + "x" + std::to_string(k.cols()));
        }
    }
    const CMatrix s = completeness_sum(in_dim_, blocks_);
    if (trace_preserving_) {
        const double err = (s - CMatrix::Identity(in_dim_, in_dim_)).cwiseAbs().maxCoeff();
        if (err > tol) throw InvalidChannelError("Kraus completeness violated by " + std::to_string(err));
    } else {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(s), Eigen::EigenvaluesOnly);
        if (es.eigenvalues().maxCoeff() > 1.0 + tol) throw InvalidChannelError("map is not trace non-increasing");
    }
}

Channel Channel::from_kraus(std::vector<CMatrix> kraus, bool trace_preserving, double tol) {
    if (kraus.empty()) throw ShapeError("from_kraus: empty Kraus list");
    const int in = static_cast<int>(kraus.front().cols());
    const int out = static_cast<int>(kraus.front().rows());
    return Channel(in, {KrausBlock{{}, out, std::move(kraus)}}, trace_preserving, tol);
}

Channel Channel::identity(int d) { return from_kraus({CMatrix::Identity(d, d)}); }

Channel Channel::unitary(const CMatrix& u) { return from_kraus({u}); }

int Channel::out_dim() const {
    int n = 0;
    for (const auto& b : blocks_) n += b.out_dim;
    return n;
}

std::size_t Channel::kraus_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks_) n += b.kraus.size();
    return n;
}

std::vector<int> Channel::block_offsets() const {
    std::vector<int> off;
    int o = 0;
    for (const auto& b : blocks_) {
        off.push_back(o);
        o += b.out_dim;
    }
    return off;
}

std::vector<CMatrix> Channel::flat_kraus() const {
    if (!labeled()) return blocks_.front().kraus;
    std::vector<CMatrix> out;
    const int total = out_dim();
    const auto off = block_offsets();
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        for (const auto& k : blocks_[i].kraus) {
            CMatrix e = CMatrix::Zero(total, in_dim_);
            e.middleRows(off[i], blocks_[i].out_dim) = k;
            out.push_back(std::move(e));
        }
    }
    return out;
}

void Channel::tag(Kind kind, std::vector<CMatrix> unitaries) {
    kind_ = kind;
    unitaries_ = std::move(unitaries);
}

CMatrix apply_map(const Channel& c, const CMatrix& rho) {
    if (rho.rows() != c.in_dim() || rho.cols() != c.in_dim()) throw ShapeError("apply: input dimension mismatch");
    const int total = c.out_dim();
    if (c.kind() == Channel::Kind::Depolarizing)
        return rho.trace() * CMatrix::Identity(total, total) / static_cast<double>(total);
    CMatrix out = CMatrix::Zero(total, total);
    const auto off = c.block_offsets();
    for (std::size_t i = 0; i < c.blocks().size(); ++i) {
        const auto& b = c.blocks()[i];
        CMatrix acc = CMatrix::Zero(b.out_dim, b.out_dim);
        for (const auto& k : b.kraus) acc.noalias() += k * rho * k.adjoint();
        out.block(off[i], off[i], b.out_dim, b.out_dim) = acc;
    }
    return out;
}

CMatrix apply_pure(const Channel& c, const CVector& psi) {
    if (psi.size() != c.in_dim()) throw ShapeError("apply: input dimension mismatch");
    const int total = c.out_dim();
    if (c.kind() == Channel::Kind::Depolarizing)
        return psi.squaredNorm() * CMatrix::Identity(total, total) / static_cast<double>(total);
    CMatrix out = CMatrix::Zero(total, total);
    const auto off = c.block_offsets();
    for (std::size_t i = 0; i < c.blocks().size(); ++i) {
        const auto& b = c.blocks()[i];
        for (const auto& k : b.kraus) {
            const CVector v = k * psi;
            out.block(off[i], off[i], b.out_dim, b.out_dim).noalias() += v * v.adjoint();
        }
    }
    return out;
}

CMatrix apply_adjoint(const Channel& c, const CMatrix& x) {
    const int total = c.out_dim();
    if (x.rows() != total || x.cols() != total) throw ShapeError("apply_adjoint: output dimension mismatch");
    if (c.kind() == Channel::Kind::Depolarizing)
        return x.trace() * CMatrix::Identity(c.in_dim(), c.in_dim()) / static_cast<double>(total);
    CMatrix out = CMatrix::Zero(c.in_dim(), c.in_dim());
    const auto off = c.block_offsets();
    for (std::size_t i = 0; i < c.blocks().size(); ++i) {
        const auto& b = c.blocks()[i];
        const CMatrix xb = x.block(off[i], off[i], b.out_dim, b.out_dim);
        for (const auto& k : b.kraus) out.noalias() += k.adjoint() * xb * k;
    }
    return out;
}

DensityMatrix apply(const Channel& c, const DensityMatrix& rho) {
    if (c.labeled()) throw StructureError("apply: labeled channel produces a hybrid state");
    return DensityMatrix(hermitian_part(apply_map(c, rho.matrix())), 1e-9);
}

HybridState apply_labeled(const Channel& c, const DensityMatrix& rho) {
    HybridState out;
    for (const auto& b : c.blocks()) {
        CMatrix acc = CMatrix::Zero(b.out_dim, b.out_dim);
        for (const auto& k : b.kraus) acc.noalias() += k * rho.matrix() * k.adjoint();
        out.add_unnormalized(b.label, acc);
    }
    return out;
}

Channel compose(const Channel& first, const Channel& second) {
    std::vector<KrausBlock> blocks;
    const bool tp = first.trace_preserving() && second.trace_preserving();
    auto products = [](const std::vector<CMatrix>& outer, const std::vector<CMatrix>& inner) {
        std::vector<CMatrix> out;
        for (const auto& k2 : outer)
            for (const auto& k1 : inner) out.push_back(k2 * k1);
        return out;
    };
    if (!first.labeled()) {
        if (second.in_dim() != first.out_dim()) throw ShapeError("compose: inner dimensions differ");
        for (const auto& b2 : second.blocks())
            blocks.push_back(KrausBlock{b2.label, b2.out_dim, products(b2.kraus, first.blocks().front().kraus)});
    } else {
        for (const auto& b1 : first.blocks()) {
            if (second.in_dim() != b1.out_dim)
                throw ShapeError("compose: block " + label_string(b1.label) + " does not match the second input");
            for (const auto& b2 : second.blocks()) {
                Label l = b1.label;
                l.insert(l.end(), b2.label.begin(), b2.label.end());
                blocks.push_back(KrausBlock{l, b2.out_dim, products(b2.kraus, b1.kraus)});
            }
        }
    }
    return Channel(first.in_dim(), std::move(blocks), tp);
}

Channel tensor(const Channel& a, const Channel& b) {
    std::vector<KrausBlock> blocks;
    for (const auto& ba : a.blocks()) {
        for (const auto& bb : b.blocks()) {
            Label l = ba.label;
            l.insert(l.end(), bb.label.begin(), bb.label.end());
            KrausBlock kb{l, ba.out_dim * bb.out_dim, {}};
            for (const auto& ka : ba.kraus)
                for (const auto& kb2 : bb.kraus) kb.kraus.push_back(kron(ka, kb2));
            blocks.push_back(std::move(kb));
        }
    }
    return Channel(a.in_dim() * b.in_dim(), std::move(blocks), a.trace_preserving() && b.trace_preserving());
}

Channel flatten(const Channel& c) {
    if (!c.labeled()) return c;
    Channel out(c.in_dim(), {KrausBlock{{}, c.out_dim(), c.flat_kraus()}}, c.trace_preserving());
    return out;
}

Channel measurement_channel(const std::vector<CMatrix>& kraus, const std::vector<Label>& labels) {
    if (kraus.size() != labels.size()) throw ShapeError("measurement_channel: one label per Kraus operator");
    std::vector<KrausBlock> blocks;
    for (std::size_t i = 0; i < kraus.size(); ++i)
        blocks.push_back(KrausBlock{labels[i], static_cast<int>(kraus[i].rows()), {kraus[i]}});
    return Channel(static_cast<int>(kraus.front().cols()), std::move(blocks));
}

std::vector<Eigen::Index> StinespringDilation::offsets() const {
    std::vector<Eigen::Index> off;
    Eigen::Index o = 0;
    for (const auto& b : blocks) {
        off.push_back(o);
        o += static_cast<Eigen::Index>(b.dim_a) * b.dim_b;
    }
    return off;
}

CMatrix StinespringDilation::block(std::size_t i) const {
    const auto off = offsets();
    return v.middleRows(off[i], static_cast<Eigen::Index>(blocks[i].dim_a) * blocks[i].dim_b);
}

void StinespringDilation::check(double tol) const {
    Eigen::Index rows = 0;
    for (const auto& b : blocks) {
        if (b.dim_a < 1 || b.dim_b < 1) throw ShapeError("dilation block " + label_string(b.label) + " has no dimension");
        rows += static_cast<Eigen::Index>(b.dim_a) * b.dim_b;
    }
    if (rows != v.rows()) throw ShapeError("dilation blocks do not cover the isometry rows");
    const double err = (v.adjoint() * v - CMatrix::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
    if (err > tol) throw InvalidChannelError("dilation is not an isometry (error " + std::to_string(err) + ")");
}

StinespringDilation stinespring(const Channel& c) {
    StinespringDilation dil;
    Eigen::Index rows = 0;
    for (const auto& b : c.blocks()) {
        const int na = std::max<int>(1, static_cast<int>(b.kraus.size()));
        dil.blocks.push_back(DilationBlock{b.label, na, b.out_dim});
        rows += static_cast<Eigen::Index>(na) * b.out_dim;
    }
    dil.v = CMatrix::Zero(rows, c.in_dim());
    Eigen::Index o = 0;
    for (const auto& b : c.blocks()) {
        const int na = std::max<int>(1, static_cast<int>(b.kraus.size()));
        for (std::size_t k = 0; k < b.kraus.size(); ++k) dil.v.middleRows(o + k * b.out_dim, b.out_dim) = b.kraus[k];
        o += static_cast<Eigen::Index>(na) * b.out_dim;
    }
    return dil;
}

Channel bob_channel(const StinespringDilation& dil) {
    std::vector<KrausBlock> blocks;
    for (std::size_t i = 0; i < dil.blocks.size(); ++i) {
        const auto& b = dil.blocks[i];
        const CMatrix vb = dil.block(i);
        KrausBlock kb{b.label, b.dim_b, {}};
        for (int a = 0; a < b.dim_a; ++a) kb.kraus.push_back(vb.middleRows(static_cast<Eigen::Index>(a) * b.dim_b, b.dim_b));
        blocks.push_back(std::move(kb));
    }
    return Channel(dil.in_dim(), std::move(blocks));
}

StinespringDilation pad_alice(const StinespringDilation& dil, const std::vector<int>& dim_a) {
    if (dim_a.size() != dil.blocks.size()) throw ShapeError("pad_alice: one dimension per block");
    StinespringDilation out;
    Eigen::Index rows = 0;
    for (std::size_t i = 0; i < dil.blocks.size(); ++i) {
        if (dim_a[i] < dil.blocks[i].dim_a) throw ShapeError("pad_alice: cannot shrink a block");
        out.blocks.push_back(DilationBlock{dil.blocks[i].label, dim_a[i], dil.blocks[i].dim_b});
        rows += static_cast<Eigen::Index>(dim_a[i]) * dil.blocks[i].dim_b;
    }
    out.v = CMatrix::Zero(rows, dil.in_dim());
    const auto src = dil.offsets();
    const auto dst = out.offsets();
    for (std::size_t i = 0; i < dil.blocks.size(); ++i) {
        const Eigen::Index n = static_cast<Eigen::Index>(dil.blocks[i].dim_a) * dil.blocks[i].dim_b;
        out.v.middleRows(dst[i], n) = dil.v.middleRows(src[i], n);
    }
    return out;
}

StinespringDilation embed_diagonal(const StinespringDilation& dil) {
    int total_a = 0, total_b = 0;
    for (const auto& b : dil.blocks) {
        total_a += b.dim_a;
        total_b += b.dim_b;
    }
    StinespringDilation out;
    out.blocks.push_back(DilationBlock{{}, total_a, total_b});
    out.v = CMatrix::Zero(static_cast<Eigen::Index>(total_a) * total_b, dil.in_dim());
    const auto off = dil.offsets();
    int oa = 0, ob = 0;
    for (std::size_t i = 0; i < dil.blocks.size(); ++i) {
        const auto& b = dil.blocks[i];
        for (int a = 0; a < b.dim_a; ++a)
            for (int bb = 0; bb < b.dim_b; ++bb)
                out.v.row(static_cast<Eigen::Index>(oa + a) * total_b + ob + bb) =
                    dil.v.row(off[i] + static_cast<Eigen::Index>(a) * b.dim_b + bb);
        oa += b.dim_a;
        ob += b.dim_b;
    }
    return out;
}

CMatrix choi(const Channel& c) {
    const int din = c.in_dim();
    const int dout = c.out_dim();
    const Eigen::Index n = static_cast<Eigen::Index>(din) * dout;
    if (c.kind() == Channel::Kind::Depolarizing) return CMatrix::Identity(n, n) / static_cast<double>(n);
    CMatrix out = CMatrix::Zero(n, n);
    for (const auto& k : c.flat_kraus()) {
        const CVector v = choi_vector(k);
        out.noalias() += v * v.adjoint();
    }
    return out;
}

double channel_fidelity(const Channel& c) {
    if (c.out_dim() != c.in_dim()) throw ShapeError("channel_fidelity: input and output dimensions differ");
    const double d = c.in_dim();
    if (c.kind() == Channel::Kind::Depolarizing) return 1.0 / (d * d);
    double acc = 0.0;
    for (const auto& k : c.flat_kraus()) acc += std::norm(k.trace());
    return acc / (d * d);
}

double average_fidelity_exact(const Channel& c) {
    if (c.out_dim() != c.in_dim()) throw ShapeError("average_fidelity: input and output dimensions differ");
    const double d = c.in_dim();
    const double fc = channel_fidelity(c);
    double trace_out = d;
    if (!c.trace_preserving()) {
        trace_out = 0.0;
        for (const auto& k : c.flat_kraus()) trace_out += k.squaredNorm();
    }
    return (d * d * fc + trace_out) / (d * (d + 1.0));
}

MonteCarloEstimate average_fidelity_mc(const Channel& c, int samples, Seed seed) {
    if (samples < 2) throw DomainError("average_fidelity_mc: need at least two samples");
    if (c.out_dim() != c.in_dim()) throw ShapeError("average_fidelity: input and output dimensions differ");
    const auto kraus = c.flat_kraus();
    double sum = 0.0, sum_sq = 0.0;
    Rng rng = seed.rng();
    for (int s = 0; s < samples; ++s) {
        const CVector psi = haar_state(c.in_dim(), rng);
        double f = 0.0;
        if (c.kind() == Channel::Kind::Depolarizing) {
            f = 1.0 / c.in_dim();
        } else {
            for (const auto& k : kraus) f += std::norm(psi.dot(k * psi));
        }
        sum += f;
        sum_sq += f * f;
    }
    MonteCarloEstimate est;
    est.samples = samples;
    est.mean = sum / samples;
    const double var = std::max(0.0, (sum_sq - samples * est.mean * est.mean) / (samples - 1.0));
    est.stderr_ = std::sqrt(var / samples);
    return est;
}

double cb_lower_choi(const Channel& a, const Channel& b, ChoiPath path) {
    if (a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim())
        throw ShapeError("cb_lower_choi: channels have different shapes");
    const Eigen::Index n = static_cast<Eigen::Index>(a.in_dim()) * a.out_dim();
    const bool a_dep = a.kind() == Channel::Kind::Depolarizing;
    const bool b_dep = b.kind() == Channel::Kind::Depolarizing;
    if (path == ChoiPath::Auto) path = n * n > 4096 ? ChoiPath::LowRank : ChoiPath::Dense;
    if (path == ChoiPath::Dense) return trace_norm(choi(a) - choi(b));

    if (a_dep && b_dep) return 0.0;
    if (a_dep || b_dep) {
        // || W W^dag - 1/n || with W of rank r <= n: eigenvalues of the Gram
        // matrix on the range, -1/n on the complement.
        const Channel& c = a_dep ? b : a;
        const auto kraus = c.flat_kraus();
        const Eigen::Index r = static_cast<Eigen::Index>(kraus.size());
        if (r <= n) {
            CMatrix w(n, r);
            for (Eigen::Index i = 0; i < r; ++i) w.col(i) = choi_vector(kraus[i]);
            Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(w.adjoint() * w), Eigen::EigenvaluesOnly);
            double acc = static_cast<double>(n - r) / static_cast<double>(n);
            for (Eigen::Index i = 0; i < r; ++i) acc += std::abs(es.eigenvalues()(i) - 1.0 / static_cast<double>(n));
            return acc;
        }
        return trace_norm(choi(a) - choi(b));
    }
    // General low-rank form: W S W^dag with S = diag(+1, -1) has the nonzero
    // spectrum of G^{1/2} S G^{1/2}, G = W^dag W.
    const auto ka = a.flat_kraus();
    const auto kb = b.flat_kraus();
    const Eigen::Index r = static_cast<Eigen::Index>(ka.size() + kb.size());
    if (r >= n) return trace_norm(choi(a) - choi(b));
    CMatrix w(n, r);
    RVector s(r);
    for (std::size_t i = 0; i < ka.size(); ++i) {
        w.col(i) = choi_vector(ka[i]);
        s(i) = 1.0;
    }
    for (std::size_t i = 0; i < kb.size(); ++i) {
        w.col(ka.size() + i) = choi_vector(kb[i]);
        s(ka.size() + i) = -1.0;
    }
    const CMatrix g_half = psd_sqrt(w.adjoint() * w, 1e-9);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(g_half * s.asDiagonal() * g_half), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

namespace {

// Kraus operators stacked vertically, so that W psi holds every K_k psi.
struct StackedMap {
    int in = 0, out = 0, count = 0;
    bool depolarizing = false;
    CMatrix w;

    explicit StackedMap(const Channel& c) : in(c.in_dim()), out(c.out_dim()) {
        depolarizing = c.kind() == Channel::Kind::Depolarizing;
        if (depolarizing) return;
        const auto ks = c.flat_kraus();
        count = static_cast<int>(ks.size());
        w.resize(static_cast<Eigen::Index>(count) * out, in);
        for (int k = 0; k < count; ++k) w.middleRows(static_cast<Eigen::Index>(k) * out, out) = ks[k];
    }

    // Columns K_k x.
    CMatrix images(const CVector& x) const {
        const CVector wx = w * x;
        return Eigen::Map<const CMatrix>(wx.data(), out, count);
    }

    CMatrix forward(const CVector& psi, const CMatrix& imgs) const {
        if (depolarizing) return psi.squaredNorm() * CMatrix::Identity(out, out) / static_cast<double>(out);
        return imgs * imgs.adjoint();
    }

    // sum_k K_k^dag s K_k x, given the images of x.
    CVector adjoint_times(const CMatrix& s, const CVector& x, const CMatrix& imgs) const {
        if (depolarizing) return s.trace() / static_cast<double>(out) * x;
        const CMatrix sy = s * imgs;
        return w.adjoint() * Eigen::Map<const CVector>(sy.data(), sy.size());
    }
};

}  // namespace

NormEstimate op_norm_estimate(const Channel& a, const Channel& b, int trials, Seed seed) {
    if (trials < 1) throw DomainError("op_norm_estimate: trials must be positive");
    if (a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim())
        throw ShapeError("op_norm_estimate: channels have different shapes");
    const StackedMap ma(a), mb(b);
    struct Images {
        CMatrix a, b;
    };
    auto images = [&](const CVector& x) {
        return Images{ma.depolarizing ? CMatrix() : ma.images(x), mb.depolarizing ? CMatrix() : mb.images(x)};
    };
    auto adjoint_times = [&](const CMatrix& s, const CVector& x, const Images& im) -> CVector {
        return ma.adjoint_times(s, x, im.a) - mb.adjoint_times(s, x, im.b);
    };

    // Each step maximizes <psi|A|psi> over span{psi, A psi} with A the
    // adjoint image of the current sign matrix. The Rayleigh quotient cannot
    // drop, so the norm never decreases.
    NormEstimate best;
    best.value = -1.0;
    int evaluations = 0;
    for (int t = 0; t < trials; ++t) {
        Rng rng = seed.child(static_cast<std::uint64_t>(t)).rng();
        CVector psi = haar_state(a.in_dim(), rng);
        Images im = images(psi);
        double value = 0.0;
        CMatrix s = sign_matrix(ma.forward(psi, im.a) - mb.forward(psi, im.b), &value);
        ++evaluations;
        NormEstimate local{value, psi, 0};
        for (int it = 0; it < 2000; ++it) {
            const CVector apsi = adjoint_times(s, psi, im);
            const cplx alpha = psi.dot(apsi);
            CVector q = apsi - alpha * psi;
            const double beta = q.norm();
            if (beta > 1e-14) {
                q /= beta;
                const double gamma = q.dot(adjoint_times(s, q, images(q))).real();
                Eigen::Matrix2cd t2;
                t2 << alpha.real(), beta, beta, gamma;
                Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(t2);
                const Eigen::Vector2cd c = es.eigenvectors().col(1);
                psi = (c(0) * psi + c(1) * q).normalized();
            }
            im = images(psi);
            double next = 0.0;
            s = sign_matrix(ma.forward(psi, im.a) - mb.forward(psi, im.b), &next);
            ++evaluations;
            if (next > local.value) {
                local.value = next;
                local.witness = psi;
            }
            const bool small = next - value < 1e-8;
            value = next;
            if (small) break;
        }
        if (local.value > best.value) best = local;
    }
    best.evaluations = evaluations;
    return best;
}

NormEstimate diamond_estimate(const Channel& a, const Channel& b, int starts, Seed seed) {
    if (starts < 1) throw DomainError("diamond_estimate: starts must be positive");
    if (a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim())
        throw ShapeError("diamond_estimate: channels have different shapes");
    const int n = a.in_dim();
    const int dout = a.out_dim();
    const auto ka = a.flat_kraus();
    const auto kb = b.flat_kraus();
    const CMatrix id_ref = CMatrix::Identity(n, n);
    std::vector<CMatrix> ea, eb;
    for (const auto& k : ka) ea.push_back(kron(k, id_ref));
    for (const auto& k : kb) eb.push_back(kron(k, id_ref));
    auto forward = [&](const CVector& psi) -> CMatrix {
        CMatrix out = CMatrix::Zero(dout * n, dout * n);
        for (const auto& e : ea) {
            const CVector v = e * psi;
            out.noalias() += v * v.adjoint();
        }
        for (const auto& e : eb) {
            const CVector v = e * psi;
            out.noalias() -= v * v.adjoint();
        }
        return out;
    };
    auto adjoint = [&](const CMatrix& s) -> CMatrix {
        CMatrix out = CMatrix::Zero(n * n, n * n);
        for (const auto& e : ea) out.noalias() += e.adjoint() * s * e;
        for (const auto& e : eb) out.noalias() -= e.adjoint() * s * e;
        return out;
    };
    NormEstimate best = sign_ascent(forward, adjoint, max_entangled(n), 1e-12, 2000);
    int evaluations = best.evaluations;
    for (int t = 1; t < starts; ++t) {
        Rng rng = seed.child(static_cast<std::uint64_t>(t)).rng();
        NormEstimate e = sign_ascent(forward, adjoint, haar_state(n * n, rng), 1e-12, 2000);
        evaluations += e.evaluations;
        if (e.value > best.value) best = e;
    }
    best.evaluations = evaluations;
    return best;
}

Channel depolarizing(int d) {
    if (d < 1) throw ShapeError("depolarizing: d must be positive");
    std::vector<CMatrix> kraus;
    kraus.reserve(static_cast<std::size_t>(d) * d);
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            CMatrix k = CMatrix::Zero(d, d);
            k(i, j) = s;
            kraus.push_back(std::move(k));
        }
    Channel c = Channel::from_kraus(std::move(kraus));
    c.tag(Channel::Kind::Depolarizing);
    return c;
}

Channel random_unitary_channel(const std::vector<CMatrix>& unitaries) {
    if (unitaries.empty()) throw ShapeError("random_unitary_channel: no unitaries");
    const double s = 1.0 / std::sqrt(static_cast<double>(unitaries.size()));
    std::vector<CMatrix> kraus;
    for (const auto& u : unitaries) kraus.push_back(s * u);
    Channel c = Channel::from_kraus(std::move(kraus));
    c.tag(Channel::Kind::RandomUnitary, unitaries);
    return c;
}

Channel randomizing_channel(int d, int mu, Seed seed) {
    if (d < 2 || mu < 1) throw DomainError("randomizing_channel: need d >= 2 and mu >= 1");
    std::vector<CMatrix> us;
    for (int i = 0; i < mu; ++i) us.push_back(haar_unitary(d, seed.child(static_cast<std::uint64_t>(i))));
    return random_unitary_channel(us);
}

long long mu_star(int d, double eps, double log_base) {
    if (d < 2 || eps <= 0) throw DomainError("mu_star: need d >= 2 and eps > 0");
    double lg = std::log(static_cast<double>(d));
    if (log_base > 0) lg /= std::log(log_base);
    return static_cast<long long>(std::ceil(134.0 / (eps * eps) * d * lg));
}

Channel measure_prepare(const std::vector<CMatrix>& povm, const std::vector<CMatrix>& states, double tol) {
    if (povm.empty() || povm.size() != states.size()) throw ShapeError("measure_prepare: one state per POVM element");
    const int din = static_cast<int>(povm.front().rows());
    const int dout = static_cast<int>(states.front().rows());
    CMatrix sum = CMatrix::Zero(din, din);
    std::vector<CMatrix> kraus;
    for (std::size_t x = 0; x < povm.size(); ++x) {
        if (povm[x].rows() != din || povm[x].cols() != din) throw ShapeError("measure_prepare: POVM shape");
        if (!is_hermitian(povm[x], tol)) throw InvalidChannelError("measure_prepare: POVM element not Hermitian");
        Eigen::SelfAdjointEigenSolver<CMatrix> em(hermitian_part(povm[x]));
        if (em.eigenvalues().minCoeff() < -tol) throw InvalidChannelError("measure_prepare: POVM element not PSD");
        sum += povm[x];
        DensityMatrix sigma(states[x], 1e-9);
        if (sigma.dim() != dout) throw ShapeError("measure_prepare: prepared states differ in dimension");
        Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(states[x]));
        for (int i = 0; i < din; ++i) {
            const double lm = em.eigenvalues()(i);
            if (lm <= 1e-15) continue;
            for (int j = 0; j < dout; ++j) {
                const double ls = es.eigenvalues()(j);
                if (ls <= 1e-15) continue;
                kraus.push_back(std::sqrt(lm * ls) * es.eigenvectors().col(j) * em.eigenvectors().col(i).adjoint());
            }
        }
    }
    if ((sum - CMatrix::Identity(din, din)).cwiseAbs().maxCoeff() > tol)
        throw InvalidChannelError("measure_prepare: POVM does not sum to the identity");
    return Channel(din, {KrausBlock{{}, dout, std::move(kraus)}}, true, 1e-8);
}

Channel random_channel(int in_dim, int out_dim, int kraus_count, Rng& rng) {
    const CMatrix v = random_isometry(out_dim * kraus_count, in_dim, rng);
    std::vector<CMatrix> kraus;
    for (int k = 0; k < kraus_count; ++k) kraus.push_back(v.middleRows(static_cast<Eigen::Index>(k) * out_dim, out_dim));
    return Channel::from_kraus(std::move(kraus));
}

double truncation_bound(double gamma) { return 4.0 * std::sqrt(gamma) + 2.0 * gamma / (1.0 - gamma); }

DensityMatrix Truncation::apply(const DensityMatrix& rho) const {
    const CMatrix out = apply_map(compressed, rho.matrix());
    const double t = out.trace().real();
    if (t <= 0.0) throw DomainError("truncated output has zero weight");
    return DensityMatrix(hermitian_part(out / t), 1e-9);
}

CMatrix random_constrained_state(const EnergyConstraint& ec, Rng& rng) {
    const int d = static_cast<int>(ec.h.rows());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(ec.h));
    const double h0 = es.eigenvalues()(0);
    if (h0 > ec.e) throw DomainError("energy bound lies below the ground energy");
    std::uniform_int_distribution<int> rank_dist(1, d);
    const CMatrix rho = random_density(d, rank_dist(rng), rng);
    const double energy = (rho * ec.h).trace().real();
    if (energy <= ec.e) return rho;
    std::uniform_real_distribution<double> u(0.5, 1.0);
    const double t = (ec.e - h0) / (energy - h0) * u(rng);
    return t * rho + (1.0 - t) * projector(es.eigenvectors().col(0));
}

Truncation energy_truncate(const Channel& c, const EnergyConstraint& ec, double gamma, Seed check_seed, int checks) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("energy_truncate: gamma must lie in (0, 1)");
    if (c.labeled() || c.in_dim() != c.out_dim()) throw ShapeError("energy_truncate: expects a square unlabeled channel");
    if (ec.h.rows() != c.in_dim() || !is_hermitian(ec.h, 1e-12)) throw ShapeError("energy_truncate: bad energy operator");
    Rng rng = check_seed.rng();
    for (int i = 0; i < checks; ++i) {
        const CMatrix rho = random_constrained_state(ec, rng);
        const double out_energy = (apply_map(c, rho) * ec.h).trace().real();
        if (out_energy > ec.e + 1e-9 * std::max(1.0, std::abs(ec.e)))
            throw DomainError("energy_truncate: channel leaves the constrained state set");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(ec.h));
    const double cutoff = ec.e / gamma;
    const int d = c.in_dim();
    Truncation t;
    t.projector = CMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        if (es.eigenvalues()(i) <= cutoff) {
            t.projector += projector(es.eigenvectors().col(i));
            ++t.rank;
        }
    }
    std::vector<CMatrix> kraus;
    for (const auto& k : c.blocks().front().kraus) kraus.push_back(t.projector * k * t.projector);
    t.compressed = Channel(d, {KrausBlock{{}, d, std::move(kraus)}}, false, 1e-8);
    t.bound = truncation_bound(gamma);
    return t;
}

FidelitySumResult maximize_fidelity_sum(const CMatrix& rho, const CMatrix& sigma, Seed seed, int restarts) {
    const int d = static_cast<int>(rho.rows());
    const CMatrix sr = psd_sqrt(rho);
    const CMatrix ss = psd_sqrt(sigma);
    auto uhlmann = [](const CMatrix& root, const CMatrix& phi) {
        // Purification root*W of the state closest to phi in overlap.
        Eigen::JacobiSVD<CMatrix> svd(root * phi, Eigen::ComputeFullU | Eigen::ComputeFullV);
        return CMatrix(root * svd.matrixU() * svd.matrixV().adjoint());
    };
    auto objective = [&](const CMatrix& phi) {
        const CMatrix omega = phi * phi.adjoint();
        const double f1 = fidelity(rho, omega);
        const double f2 = fidelity(sigma, omega);
        return f1 * f1 + f2 * f2;
    };
    FidelitySumResult best;
    best.value = -1.0;
    Rng rng = seed.rng();
    for (int r = 0; r < restarts; ++r) {
        CMatrix phi = ginibre(d, d, rng);
        phi /= phi.norm();
        double value = objective(phi);
        int it = 0;
        for (; it < 500; ++it) {
            const CMatrix x = uhlmann(sr, phi);
            const CMatrix y = uhlmann(ss, phi);
            const cplx c = (x.adjoint() * y).trace();
            const cplx phase = std::abs(c) > 0 ? std::conj(c) / std::abs(c) : cplx(1.0, 0.0);
            CMatrix next = x + phase * y;
            const double nn = next.norm();
            next = nn > 1e-300 ? CMatrix(next / nn) : x;
            const double next_value = objective(next);
            const bool done = next_value - value < 1e-14;
            if (next_value >= value) {
                phi = next;
                value = next_value;
            }
            if (done) break;
        }
        if (value > best.value) {
            best.value = value;
            best.omega = hermitian_part(phi * phi.adjoint());
            best.iterations = it;
        }
    }
    return best;
}

}  // namespace qbc
