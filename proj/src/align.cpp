#include "qbc/align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qbc/optimize.hpp"

namespace qbc {

namespace {

// Per-block slices s[b] with s[b](a, :) = row a*dB + b of the block, so
// that tr_B(V0 rho V1^dag) = sum_b s0[b] rho s1[b]^dag and
// V1^dag (C x 1) V0 = sum_b s1[b]^dag C s0[b].
struct BlockSlices {
    int dim_a = 1;
    int dim_b = 1;
    std::vector<CMatrix> s0;
    std::vector<CMatrix> s1;
};

struct Problem {
    int n = 1;
    std::vector<BlockSlices> blocks;
    StinespringDilation v0;
    StinespringDilation v1;

    CMatrix overlap(std::size_t x, const CMatrix& rho) const {
        const auto& bl = blocks[x];
        CMatrix m = CMatrix::Zero(bl.dim_a, bl.dim_a);
        for (int b = 0; b < bl.dim_b; ++b) m.noalias() += bl.s0[b] * rho * bl.s1[b].adjoint();
        return m;
    }

    CMatrix gram(const std::vector<CMatrix>& c) const {
        CMatrix h = CMatrix::Zero(n, n);
        for (std::size_t x = 0; x < blocks.size(); ++x)
            for (int b = 0; b < blocks[x].dim_b; ++b) h.noalias() += blocks[x].s1[b].adjoint() * c[x] * blocks[x].s0[b];
        return hermitian_part(h);
    }

    double dual(const CMatrix& rho) const {
        double d = 0.0;
        for (std::size_t x = 0; x < blocks.size(); ++x) d += trace_norm(overlap(x, rho));
        return d;
    }
};

Problem make_problem(const StinespringDilation& v0, const StinespringDilation& v1) {
    Problem p;
    p.n = v0.in_dim();
    p.v0 = v0;
    p.v1 = v1;
    for (std::size_t x = 0; x < v0.blocks.size(); ++x) {
        BlockSlices bl;
        bl.dim_a = v0.blocks[x].dim_a;
        bl.dim_b = v0.blocks[x].dim_b;
        const CMatrix b0 = v0.block(x);
        const CMatrix b1 = v1.block(x);
        for (int b = 0; b < bl.dim_b; ++b) {
            CMatrix s0(bl.dim_a, p.n), s1(bl.dim_a, p.n);
            for (int a = 0; a < bl.dim_a; ++a) {
                s0.row(a) = b0.row(static_cast<Eigen::Index>(a) * bl.dim_b + b);
                s1.row(a) = b1.row(static_cast<Eigen::Index>(a) * bl.dim_b + b);
            }
            bl.s0.push_back(std::move(s0));
            bl.s1.push_back(std::move(s1));
        }
        p.blocks.push_back(std::move(bl));
    }
    return p;
}

// Orthonormal traceless Hermitian basis (generalized Gell-Mann matrices).
std::vector<CMatrix> traceless_basis(int n) {
    std::vector<CMatrix> g;
    const double r = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            CMatrix s = CMatrix::Zero(n, n);
            s(j, k) = s(k, j) = r;
            g.push_back(s);
            CMatrix a = CMatrix::Zero(n, n);
            a(j, k) = cplx(0, -r);
            a(k, j) = cplx(0, r);
            g.push_back(a);
        }
    for (int l = 1; l < n; ++l) {
        CMatrix d = CMatrix::Zero(n, n);
        const double s = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
        for (int j = 0; j < l; ++j) d(j, j) = s;
        d(l, l) = -l * s;
        g.push_back(d);
    }
    return g;
}

struct Bottom {
    double value;
    CVector vec;
};

Bottom bottom_eigen(const CMatrix& h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

std::vector<CMatrix> identity_blocks(const Problem& p) {
    std::vector<CMatrix> u;
    for (const auto& bl : p.blocks) u.push_back(CMatrix::Identity(bl.dim_a, bl.dim_a));
    return u;
}

std::vector<CMatrix> polar_blocks(const Problem& p, const CMatrix& rho) {
    std::vector<CMatrix> u;
    for (std::size_t x = 0; x < p.blocks.size(); ++x) u.push_back(polar_align(p.overlap(x, rho)).unitary);
    return u;
}

struct Candidate {
    std::vector<CMatrix> ops;
    bool padded = false;
    double value = std::numeric_limits<double>::infinity();
};

bool is_unitary(const CMatrix& c, double tol) {
    return (c.adjoint() * c - CMatrix::Identity(c.cols(), c.cols())).cwiseAbs().maxCoeff() <= tol;
}

// Affine family C_x = F_x + L_x K_x R_x over square blocks K_x.
struct ContractionFamily {
    std::vector<CMatrix> fixed, left, right;
    std::vector<int> k;

    int params() const {
        int n = 0;
        for (int kx : k) n += 2 * kx * kx;
        return n;
    }

    std::vector<CMatrix> unpack(const RVector& z) const {
        std::vector<CMatrix> c;
        int o = 0;
        for (std::size_t x = 0; x < k.size(); ++x) {
            CMatrix kk(k[x], k[x]);
            for (int i = 0; i < k[x]; ++i)
                for (int j = 0; j < k[x]; ++j, o += 2) kk(i, j) = cplx(z(o), z(o + 1));
            c.push_back(k[x] > 0 ? CMatrix(fixed[x] + left[x] * kk * right[x]) : fixed[x]);
        }
        return c;
    }

    std::vector<CMatrix> inner(const RVector& z) const {
        std::vector<CMatrix> out;
        int o = 0;
        for (std::size_t x = 0; x < k.size(); ++x) {
            CMatrix kk(k[x], k[x]);
            for (int i = 0; i < k[x]; ++i)
                for (int j = 0; j < k[x]; ++j, o += 2) kk(i, j) = cplx(z(o), z(o + 1));
            out.push_back(kk);
        }
        return out;
    }

    // Gradient of z -> Re tr(K_x n) for one block, embedded in the full vector.
    RVector linear_gradient(std::size_t block, const CMatrix& n) const {
        RVector g = RVector::Zero(params());
        int o = 0;
        for (std::size_t x = 0; x < block; ++x) o += 2 * k[x] * k[x];
        for (int i = 0; i < k[block]; ++i)
            for (int j = 0; j < k[block]; ++j, o += 2) {
                g(o) = n(j, i).real();
                g(o + 1) = -n(j, i).imag();
            }
        return g;
    }
};

// Maximizes lambda_min(Herm V1^dag (C x 1) V0) over contractions in the family.
std::vector<CMatrix> primal_ellipsoid(const Problem& p, const ContractionFamily& fam, int max_iter) {
    const int np = fam.params();
    double radius2 = 0.0;
    for (int kx : fam.k) radius2 += kx;
    auto oracle = [&](const RVector& z) {
        EllipsoidCut cut;
        const auto ks = fam.inner(z);
        double worst = 1.0;
        std::size_t worst_block = 0;
        CMatrix worst_n;
        for (std::size_t x = 0; x < ks.size(); ++x) {
            if (fam.k[x] == 0) continue;
            Eigen::JacobiSVD<CMatrix> svd(ks[x], Eigen::ComputeFullU | Eigen::ComputeFullV);
            const double s = svd.singularValues()(0);
            if (s > worst) {
                worst = s;
                worst_block = x;
                worst_n = svd.matrixV().col(0) * svd.matrixU().col(0).adjoint();
            }
        }
        if (worst > 1.0) {
            cut.feasible = false;
            cut.cut = fam.linear_gradient(worst_block, worst_n);
            return cut;
        }
        const auto c = fam.unpack(z);
        const Bottom bt = bottom_eigen(p.gram(c));
        cut.value = -bt.value;
        cut.cut = RVector::Zero(np);
        const CMatrix w = projector(bt.vec);
        for (std::size_t x = 0; x < fam.k.size(); ++x) {
            if (fam.k[x] == 0) continue;
            const CMatrix nx = fam.right[x] * p.overlap(x, w) * fam.left[x];
            cut.cut -= fam.linear_gradient(x, nx);
        }
        return cut;
    };
    const EllipsoidResult r = ellipsoid_minimize(RVector::Zero(np), std::sqrt(radius2) + 1e-9, oracle, max_iter, 1e-13);
    return fam.unpack(r.found_feasible ? r.best : RVector::Zero(np));
}

// Gap above which the contraction refinements run.
constexpr double kRefineGap = 1e-11;

AlignResult solve(const Problem& p, const AlignOptions& opts) {
    AlignResult res;
    int iterations = 0;
    std::vector<Candidate> cands;
    double best_dual = std::numeric_limits<double>::infinity();
    CMatrix best_rho = CMatrix::Identity(p.n, p.n) / static_cast<double>(p.n);

    auto note_dual = [&](const CMatrix& rho) {
        const double d = p.dual(rho);
        if (d < best_dual) {
            best_dual = d;
            best_rho = rho;
        }
    };

    // Alternating minimax from several starts.
    {
        Candidate alt;
        double alt_f = -std::numeric_limits<double>::infinity();
        for (int r = 0; r < std::max(1, opts.restarts); ++r) {
            CMatrix rho;
            if (r == 0) {
                rho = CMatrix::Identity(p.n, p.n) / static_cast<double>(p.n);
            } else if (r == 1) {
                rho = projector(bottom_eigen(p.gram(identity_blocks(p))).vec);
            } else {
                Rng rng = opts.seed.child(static_cast<std::uint64_t>(r)).rng();
                rho = projector(haar_state(p.n, rng));
            }
            double run_f = -std::numeric_limits<double>::infinity();
            for (int it = 0; it < opts.max_iter; ++it) {
                ++iterations;
                note_dual(rho);
                auto u = polar_blocks(p, rho);
                const Bottom bt = bottom_eigen(p.gram(u));
                const bool improved = bt.value > run_f + opts.tol;
                if (bt.value > alt_f) {
                    alt_f = bt.value;
                    alt.ops = u;
                }
                if (!improved) break;
                run_f = bt.value;
                rho = projector(bt.vec);
            }
        }
        cands.push_back(alt);
    }

    // Ellipsoid on the dual: minimize sum_x ||M_x(rho)||_1 over states.
    if (p.n > 1) {
        const auto basis = traceless_basis(p.n);
        const int dim = static_cast<int>(basis.size());
        auto state = [&](const RVector& z) {
            CMatrix rho = CMatrix::Identity(p.n, p.n) / static_cast<double>(p.n);
            for (int k = 0; k < dim; ++k) rho += z(k) * basis[k];
            return rho;
        };
        auto oracle = [&](const RVector& z) {
            EllipsoidCut cut;
            cut.cut.resize(dim);
            const CMatrix rho = state(z);
            const Bottom bt = bottom_eigen(rho);
            if (bt.value < 0.0) {
                cut.feasible = false;
                for (int k = 0; k < dim; ++k) cut.cut(k) = -bt.vec.dot(basis[k] * bt.vec).real();
                return cut;
            }
            std::vector<CMatrix> u;
            double d = 0.0;
            for (std::size_t x = 0; x < p.blocks.size(); ++x) {
                const PolarResult pr = polar_align(p.overlap(x, rho));
                d += pr.value;
                u.push_back(pr.unitary);
            }
            if (d < best_dual) {
                best_dual = d;
                best_rho = rho;
            }
            const CMatrix h = p.gram(u);
            for (int k = 0; k < dim; ++k) cut.cut(k) = (h * basis[k]).trace().real();
            cut.value = d;
            return cut;
        };
        const double radius = std::sqrt(1.0 - 1.0 / p.n);
        const EllipsoidResult er =
            ellipsoid_minimize(RVector::Zero(dim), radius + 1e-12, oracle, opts.ellipsoid_iter, 1e-14);
        iterations += er.iterations;
    } else {
        note_dual(CMatrix::Identity(1, 1));
    }

    Candidate dual_cand;
    dual_cand.ops = polar_blocks(p, best_rho);
    cands.push_back(dual_cand);

    auto evaluate = [&](Candidate& c) { c.value = alignment_value(p.v0, p.v1, c.ops); };
    for (auto& c : cands) evaluate(c);

    const double lower = std::sqrt(std::max(0.0, 2.0 - 2.0 * best_dual));
    auto best_value = [&]() {
        double v = std::numeric_limits<double>::infinity();
        for (const auto& c : cands) v = std::min(v, c.value);
        return v;
    };

    auto add_contraction = [&](const std::vector<CMatrix>& c) {
        Candidate uc;
        bool all_unitary = true;
        for (const auto& cx : c) {
            uc.ops.push_back(polar_align(cx.adjoint()).unitary);
            all_unitary = all_unitary && is_unitary(cx, 1e-12);
        }
        evaluate(uc);
        cands.push_back(uc);
        if (opts.allow_padding && !all_unitary) {
            Candidate hc;
            hc.padded = true;
            for (const auto& cx : c) hc.ops.push_back(halmos_dilation(cx));
            evaluate(hc);
            cands.push_back(hc);
        }
    };

    // Refine on the null space of the dual overlap, where the optimal
    // contraction is not fixed by the polar factor.
    if (best_value() - lower > kRefineGap) {
        ContractionFamily fam;
        double smax = 0.0;
        std::vector<Eigen::JacobiSVD<CMatrix>> svds;
        for (std::size_t x = 0; x < p.blocks.size(); ++x) {
            svds.emplace_back(p.overlap(x, best_rho), Eigen::ComputeFullU | Eigen::ComputeFullV);
            smax = std::max(smax, svds.back().singularValues()(0));
        }
        for (std::size_t x = 0; x < p.blocks.size(); ++x) {
            const auto& svd = svds[x];
            const int da = p.blocks[x].dim_a;
            int rank = 0;
            while (rank < da && svd.singularValues()(rank) > 1e-7 * std::max(smax, 1e-300)) ++rank;
            const CMatrix pu = svd.matrixU();
            const CMatrix qv = svd.matrixV();
            fam.fixed.push_back(qv.leftCols(rank) * pu.leftCols(rank).adjoint());
            fam.left.push_back(qv.rightCols(da - rank));
            fam.right.push_back(pu.rightCols(da - rank).adjoint());
            fam.k.push_back(da - rank);
        }
        const int np = fam.params();
        if (np > 0 && np <= 400) {
            add_contraction(primal_ellipsoid(p, fam, std::min(opts.ellipsoid_iter, 40 * np * np + 2000)));
        }
    }

    // Full contraction relaxation when the problem is small enough.
    if (best_value() - lower > kRefineGap) {
        ContractionFamily fam;
        for (const auto& bl : p.blocks) {
            fam.fixed.push_back(CMatrix::Zero(bl.dim_a, bl.dim_a));
            fam.left.push_back(CMatrix::Identity(bl.dim_a, bl.dim_a));
            fam.right.push_back(CMatrix::Identity(bl.dim_a, bl.dim_a));
            fam.k.push_back(bl.dim_a);
        }
        const int np = fam.params();
        if (np <= 200) add_contraction(primal_ellipsoid(p, fam, std::min(opts.ellipsoid_iter, 40 * np * np + 2000)));
    }

    // Local polish of the best plain unitary when the certificate is not
    // met without padding.
    {
        const Candidate* plain = nullptr;
        double padded_best = std::numeric_limits<double>::infinity();
        for (const auto& c : cands) {
            if (c.padded) padded_best = std::min(padded_best, c.value);
            else if (!plain || c.value < plain->value) plain = &c;
        }
        int coords = 0;
        for (const auto& bl : p.blocks) coords += bl.dim_a * bl.dim_a;
        const bool padded_ok = opts.allow_padding && padded_best - lower <= opts.certify_tol;
        if (plain && plain->value - lower > opts.certify_tol && !padded_ok && coords <= 64) {
            const std::vector<CMatrix> base = plain->ops;
            auto rotate = [&](const RVector& z) {
                std::vector<CMatrix> u;
                int o = 0;
                for (std::size_t x = 0; x < base.size(); ++x) {
                    const int d = p.blocks[x].dim_a;
                    u.push_back(base[x] * unitary_from_coords(z.segment(o, d * d), d));
                    o += d * d;
                }
                return u;
            };
            auto objective = [&](const RVector& z) { return alignment_value(p.v0, p.v1, rotate(z)); };
            RVector z = RVector::Zero(coords);
            for (double step : {0.2, 0.02, 0.002}) z = nelder_mead(objective, z, step, 400 * coords + 400, 1e-14).x;
            Candidate pc;
            pc.ops = rotate(z);
            evaluate(pc);
            cands.push_back(pc);
        }
    }

    // Smallest value wins; padding is only used when it helps measurably.
    const Candidate* best = nullptr;
    const Candidate* best_plain = nullptr;
    for (const auto& c : cands) {
        if (!best || c.value < best->value) best = &c;
        if (!c.padded && (!best_plain || c.value < best_plain->value)) best_plain = &c;
    }
    if (best->padded && best_plain->value <= best->value + 1e-12) best = best_plain;

    res.unitaries = best->ops;
    for (const auto& u : best->ops) res.dim_a.push_back(static_cast<int>(u.rows()));
    res.value = best->value;
    res.padded = best->padded;
    res.lower_bound = std::min(lower, res.value);
    res.converged = res.value - res.lower_bound <= opts.certify_tol;
    res.iterations = iterations;
    return res;
}

}  // namespace

EllipsoidResult ellipsoid_minimize(const RVector& center, double radius,
                                   const std::function<EllipsoidCut(const RVector&)>& oracle, int max_iter,
                                   double gap_tol) {
    const Eigen::Index n = center.size();
    EllipsoidResult res;
    res.best = center;
    res.best_value = std::numeric_limits<double>::infinity();
    res.lower_bound = -std::numeric_limits<double>::infinity();
    RVector c = center;
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) * radius * radius;
    const double nn = static_cast<double>(n);
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        const EllipsoidCut cut = oracle(c);
        const RVector pa = P * cut.cut;
        const double apa = cut.cut.dot(pa);
        if (cut.feasible) {
            res.found_feasible = true;
            if (cut.value < res.best_value) {
                res.best_value = cut.value;
                res.best = c;
            }
            const double lb = cut.value - std::sqrt(std::max(0.0, apa));
            res.lower_bound = std::max(res.lower_bound, lb);
            if (res.best_value - res.lower_bound <= gap_tol) break;
        }
        if (!(apa > 0.0) || !std::isfinite(apa)) {
            // A zero subgradient at a feasible point means the center is optimal.
            if (cut.feasible) res.lower_bound = std::max(res.lower_bound, cut.value);
            break;
        }
        if (n == 1) {
            // Interval bisection.
            const double half = std::sqrt(P(0, 0));
            const double step = cut.cut(0) > 0 ? -0.5 * half : 0.5 * half;
            c(0) += step;
            P(0, 0) = 0.25 * P(0, 0);
            continue;
        }
        const RVector b = pa / std::sqrt(apa);
        c -= b / (nn + 1.0);
        P = (nn * nn / (nn * nn - 1.0)) * (P - (2.0 / (nn + 1.0)) * b * b.transpose());
        P = 0.5 * (P + P.transpose());
    }
    return res;
}

StinespringDilation apply_alice(const StinespringDilation& v, const std::vector<CMatrix>& ops) {
    if (ops.size() != v.blocks.size()) throw ShapeError("apply_alice: one operator per block");
    std::vector<int> pad;
    for (std::size_t x = 0; x < ops.size(); ++x) pad.push_back(std::max<int>(v.blocks[x].dim_a, static_cast<int>(ops[x].cols())));
    const StinespringDilation src = pad_alice(v, pad);
    StinespringDilation out;
    Eigen::Index rows = 0;
    for (std::size_t x = 0; x < ops.size(); ++x) {
        if (ops[x].cols() != pad[x]) throw ShapeError("apply_alice: operator does not fit block " + label_string(v.blocks[x].label));
        out.blocks.push_back(DilationBlock{v.blocks[x].label, static_cast<int>(ops[x].rows()), v.blocks[x].dim_b});
        rows += ops[x].rows() * v.blocks[x].dim_b;
    }
    out.v = CMatrix::Zero(rows, v.in_dim());
    const auto off = out.offsets();
    for (std::size_t x = 0; x < ops.size(); ++x) {
        const CMatrix blk = src.block(x);
        const int db = v.blocks[x].dim_b;
        out.v.middleRows(off[x], ops[x].rows() * db) = kron(ops[x], CMatrix::Identity(db, db)) * blk;
    }
    return out;
}

double alignment_value(const StinespringDilation& v0, const StinespringDilation& v1,
                       const std::vector<CMatrix>& unitaries) {
    const StinespringDilation rotated = apply_alice(v0, unitaries);
    std::vector<int> dims;
    for (const auto& b : rotated.blocks) dims.push_back(b.dim_a);
    const StinespringDilation target = pad_alice(v1, dims);
    return operator_norm(rotated.v - target.v);
}

double overlap_dual(const StinespringDilation& v0, const StinespringDilation& v1, const CMatrix& rho) {
    return make_problem(v0, v1).dual(rho);
}

CMatrix halmos_dilation(const CMatrix& c) {
    const Eigen::Index k = c.rows();
    const CMatrix id = CMatrix::Identity(k, k);
    CMatrix u(2 * k, 2 * k);
    u.topLeftCorner(k, k) = c;
    u.topRightCorner(k, k) = psd_sqrt(hermitian_part(id - c * c.adjoint()), 1e-8);
    u.bottomLeftCorner(k, k) = psd_sqrt(hermitian_part(id - c.adjoint() * c), 1e-8);
    u.bottomRightCorner(k, k) = -c.adjoint();
    return u;
}

AlignResult align_isometries(const StinespringDilation& v0, const StinespringDilation& v1, const AlignOptions& opts) {
    if (v0.in_dim() != v1.in_dim()) throw ShapeError("align: input dimensions differ");
    if (v0.blocks.size() != v1.blocks.size()) throw StructureError("align: block structures differ");
    v0.check();
    v1.check();
    std::vector<int> dims;
    for (std::size_t x = 0; x < v0.blocks.size(); ++x) {
        if (v0.blocks[x].label != v1.blocks[x].label || v0.blocks[x].dim_b != v1.blocks[x].dim_b)
            throw StructureError("align: block " + label_string(v0.blocks[x].label) + " differs between dilations");
        dims.push_back(std::max(v0.blocks[x].dim_a, v1.blocks[x].dim_a));
    }
    StinespringDilation p0 = pad_alice(v0, dims);
    StinespringDilation p1 = pad_alice(v1, dims);
    if (!opts.blockwise) {
        p0 = embed_diagonal(p0);
        p1 = embed_diagonal(p1);
    }
    return solve(make_problem(p0, p1), opts);
}

}  // namespace qbc
