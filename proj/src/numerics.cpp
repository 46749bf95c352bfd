#include "qbc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace qbc {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Seed Seed::child(std::uint64_t index) const {
    return Seed{value, splitmix64(stream ^ splitmix64(index + 0x632be59bd9b4e019ULL))};
}

Rng Seed::rng() const {
    std::seed_seq seq{static_cast<std::uint32_t>(value), static_cast<std::uint32_t>(value >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

DensityMatrix::DensityMatrix(CMatrix m, double tol) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) throw ShapeError("density matrix must be square and non-empty");
    if (!m_.allFinite()) throw DomainError("density matrix has non-finite entries");
    if (!is_hermitian(m_, tol)) throw DomainError("density matrix is not Hermitian");
    const double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > tol) throw DomainError("density matrix trace is " + std::to_string(tr));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m_), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) throw DomainError("density matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::pure(const CVector& psi) {
    return DensityMatrix(projector(psi.normalized()));
}

DensityMatrix DensityMatrix::maximally_mixed(int d) {
    return DensityMatrix(identity(d) / static_cast<double>(d));
}

CMatrix identity(int d) { return CMatrix::Identity(d, d); }

CMatrix kron(const CMatrix& a, const CMatrix& b, std::int64_t max_entries) {
    const std::int64_t rows = static_cast<std::int64_t>(a.rows()) * b.rows();
    const std::int64_t cols = static_cast<std::int64_t>(a.cols()) * b.cols();
    if (rows * cols > max_entries) {
        throw DimensionLimitError("kron result " + std::to_string(rows) + "x" + std::to_string(cols) +
                                  " exceeds the entry limit");
    }
    CMatrix out(rows, cols);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

CVector kron(const CVector& a, const CVector& b) {
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

CMatrix partial_trace(const CMatrix& m, const std::vector<int>& dims, const std::vector<int>& keep) {
    if (m.rows() != m.cols()) throw ShapeError("partial_trace: matrix not square");
    std::int64_t total = 1;
    for (int d : dims) {
        if (d < 1) throw ShapeError("partial_trace: factor dimension must be positive");
        total *= d;
    }
    if (total != m.rows()) throw ShapeError("partial_trace: factor dimensions do not match matrix size");
    const int n = static_cast<int>(dims.size());
    std::vector<bool> kept(n, false);
    for (int k : keep) {
        if (k < 0 || k >= n) throw ShapeError("partial_trace: keep index out of range");
        kept[k] = true;
    }
    // Strides of each factor in the full index, left factor slowest.
    std::vector<std::int64_t> stride(n, 1);
    for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];

    std::vector<int> kept_idx, traced_idx;
    for (int i = 0; i < n; ++i) (kept[i] ? kept_idx : traced_idx).push_back(i);
    std::int64_t dk = 1, dt = 1;
    for (int i : kept_idx) dk *= dims[i];
    for (int i : traced_idx) dt *= dims[i];

    auto offsets = [&](const std::vector<int>& which, std::int64_t count) {
        std::vector<std::int64_t> off(count, 0);
        for (std::int64_t c = 0; c < count; ++c) {
            std::int64_t rem = c, o = 0;
            for (int w = static_cast<int>(which.size()) - 1; w >= 0; --w) {
                const int f = which[w];
                o += (rem % dims[f]) * stride[f];
                rem /= dims[f];
            }
            off[c] = o;
        }
        return off;
    };
    const auto koff = offsets(kept_idx, dk);
    const auto toff = offsets(traced_idx, dt);

    CMatrix out = CMatrix::Zero(dk, dk);
    for (std::int64_t r = 0; r < dk; ++r) {
        for (std::int64_t c = 0; c < dk; ++c) {
            cplx acc = 0.0;
            for (std::int64_t t = 0; t < dt; ++t) acc += m(koff[r] + toff[t], koff[c] + toff[t]);
            out(r, c) = acc;
        }
    }
    return out;
}

CMatrix partial_transpose(const CMatrix& m, const std::vector<int>& dims, int which) {
    if (dims.size() != 2 || which < 0 || which > 1) throw ShapeError("partial_transpose: expects two factors");
    const int da = dims[0], db = dims[1];
    if (m.rows() != da * db || m.cols() != da * db) throw ShapeError("partial_transpose: dimension mismatch");
    CMatrix out(m.rows(), m.cols());
    for (int a = 0; a < da; ++a)
        for (int b = 0; b < db; ++b)
            for (int a2 = 0; a2 < da; ++a2)
                for (int b2 = 0; b2 < db; ++b2) {
                    const cplx v = m(a * db + b, a2 * db + b2);
                    if (which == 0)
                        out(a2 * db + b, a * db + b2) = v;
                    else
                        out(a * db + b2, a2 * db + b) = v;
                }
    return out;
}

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

bool is_hermitian(const CMatrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.norm());
    return (m - m.adjoint()).norm() <= tol * scale;
}

CMatrix projector(const CVector& psi) { return psi * psi.adjoint(); }

double trace_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() == m.cols() && (m - m.adjoint()).norm() <= 1e-14 * std::max(1.0, m.norm())) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().sum();
    }
    Eigen::BDCSVD<CMatrix> svd(m);
    return svd.singularValues().sum();
}

double operator_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::BDCSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

CMatrix psd_sqrt(const CMatrix& m, double tol) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m));
    RVector ev = es.eigenvalues();
    const double floor = -tol * std::max(1.0, ev.cwiseAbs().maxCoeff());
    if (ev.minCoeff() < floor) throw DomainError("psd_sqrt: matrix has a negative eigenvalue");
    // Eigenvalues at roundoff level are zeroed so their square roots do not
    // inject spurious weight of order sqrt(machine epsilon).
    const double noise = 1e-14 * static_cast<double>(ev.size()) * std::max(0.0, ev.maxCoeff());
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = ev(i) <= noise ? 0.0 : std::sqrt(ev(i));
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity(const CMatrix& rho, const CMatrix& sigma) {
    if (rho.rows() != sigma.rows()) throw ShapeError("fidelity: dimension mismatch");
    // tr sqrt(sqrt(rho) sigma sqrt(rho)) equals the trace norm of
    // sqrt(rho) sqrt(sigma), which avoids a second square root.
    const CMatrix prod = psd_sqrt(rho) * psd_sqrt(sigma);
    Eigen::JacobiSVD<CMatrix> svd(prod);
    return std::clamp(svd.singularValues().sum(), 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return fidelity(rho.matrix(), sigma.matrix());
}

PolarResult polar_align(const CMatrix& m) {
    if (m.rows() != m.cols()) throw ShapeError("polar_align: matrix must be square");
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    // m = P S Q^dagger, maximizer U = Q P^dagger. Null directions pair up
    // through the full singular bases, which is the identity completion.
    PolarResult r;
    r.unitary = svd.matrixV() * svd.matrixU().adjoint();
    r.value = svd.singularValues().sum();
    return r;
}

CMatrix ginibre(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    CMatrix g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const double re = nd(rng);
            const double im = nd(rng);
            g(i, j) = cplx(re, im) / std::sqrt(2.0);
        }
    return g;
}

CMatrix haar_unitary(int d, Rng& rng) {
    if (d < 1) throw ShapeError("haar_unitary: d must be positive");
    const CMatrix z = ginibre(d, d, rng);
    Eigen::HouseholderQR<CMatrix> qr(z);
    CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        const cplx diag = r(j, j);
        const double mag = std::abs(diag);
        const cplx phase = mag > 0 ? diag / mag : cplx(1.0, 0.0);
        q.col(j) *= phase;
    }
    return q;
}

CMatrix haar_unitary(int d, Seed seed) {
    Rng rng = seed.rng();
    return haar_unitary(d, rng);
}

CVector haar_state(int d, Rng& rng) {
    CVector v = ginibre(d, 1, rng).col(0);
    return v / v.norm();
}

CMatrix random_density(int d, int rank, Rng& rng) {
    const CMatrix g = ginibre(d, std::max(1, rank), rng);
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return hermitian_part(rho);
}

CMatrix random_isometry(int rows, int cols, Rng& rng) {
    if (rows < cols) throw ShapeError("random_isometry: rows must be at least cols");
    return haar_unitary(rows, rng).leftCols(cols);
}

MubPair fourier_mub(int d) {
    if (d < 2) throw ShapeError("fourier_mub: d must be at least 2");
    MubPair out;
    const double norm = 1.0 / std::sqrt(static_cast<double>(d));
    for (int j = 0; j < d; ++j) out.e.push_back(basis_vector(d, j));
    for (int k = 1; k <= d; ++k) {
        CVector f(d);
        for (int j = 1; j <= d; ++j) {
            // Reduce jk mod d first so the phase is exact for small arguments.
            const int r = (j * k) % d;
            const double angle = 2.0 * kPi * r / d;
            cplx phase = r == 0 ? cplx(1.0, 0.0) : std::polar(1.0, angle);
            if (2 * r == d) phase = cplx(-1.0, 0.0);
            f(j - 1) = norm * phase;
        }
        out.f.push_back(f);
    }
    return out;
}

CVector basis_vector(int d, int i) {
    CVector v = CVector::Zero(d);
    v(i) = 1.0;
    return v;
}

CVector max_entangled(int d) {
    if (d < 1) throw ShapeError("max_entangled: d must be positive");
    CVector v = CVector::Zero(d * d);
    const double a = 1.0 / std::sqrt(static_cast<double>(d));
    for (int j = 0; j < d; ++j) v(j * d + j) = a;
    return v;
}

}  // namespace qbc
