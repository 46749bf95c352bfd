#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "qbc/errors.hpp"

namespace qbc {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;

// Largest number of entries any dense matrix built by kron may have.
inline constexpr std::int64_t kDefaultMaxEntries = std::int64_t{1} << 24;

// Deterministic random stream: the same (value, stream) pair always yields
// the same sample sequence. Trials derive child streams by index.
struct Seed {
    std::uint64_t value = 0;
    std::uint64_t stream = 0;

    Seed child(std::uint64_t index) const;
    Rng rng() const;
};

std::uint64_t splitmix64(std::uint64_t x);

// Normalized density operator with validated invariants.
class DensityMatrix {
public:
    static constexpr double kTol = 1e-10;

    explicit DensityMatrix(CMatrix m, double tol = kTol);

    int dim() const { return static_cast<int>(m_.rows()); }
    const CMatrix& matrix() const { return m_; }

    static DensityMatrix pure(const CVector& psi);
    static DensityMatrix maximally_mixed(int d);

private:
    CMatrix m_;
};

CMatrix kron(const CMatrix& a, const CMatrix& b, std::int64_t max_entries = kDefaultMaxEntries);
CVector kron(const CVector& a, const CVector& b);
CMatrix identity(int d);

// Traces out every factor whose index is not listed in keep.
CMatrix partial_trace(const CMatrix& m, const std::vector<int>& dims, const std::vector<int>& keep);
CMatrix partial_transpose(const CMatrix& m, const std::vector<int>& dims, int which);

double trace_norm(const CMatrix& m);
double operator_norm(const CMatrix& m);
CMatrix hermitian_part(const CMatrix& m);
bool is_hermitian(const CMatrix& m, double tol);
CMatrix projector(const CVector& psi);

// Square root of a positive semidefinite matrix; eigenvalues below zero
// within tol are clipped, larger violations raise DomainError.
CMatrix psd_sqrt(const CMatrix& m, double tol = 1e-10);

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double fidelity(const CMatrix& rho, const CMatrix& sigma);

struct PolarResult {
    CMatrix unitary;
    double value = 0.0;
};

// Unitary U maximizing Re tr(U m); the maximum is the trace norm of m.
PolarResult polar_align(const CMatrix& m);

CMatrix haar_unitary(int d, Seed seed);
CMatrix haar_unitary(int d, Rng& rng);
CVector haar_state(int d, Rng& rng);
CMatrix ginibre(int rows, int cols, Rng& rng);
// Random density matrix of the given rank (induced measure).
CMatrix random_density(int d, int rank, Rng& rng);
// Random isometry from C^cols into C^rows (rows >= cols).
CMatrix random_isometry(int rows, int cols, Rng& rng);

struct MubPair {
    std::vector<CVector> e;
    std::vector<CVector> f;
};

// Computational basis and its Fourier transform, f_k = d^{-1/2} sum_j
// exp(2 pi i j k / d) e_j with j,k counted from 1.
MubPair fourier_mub(int d);
CVector max_entangled(int d);
CVector basis_vector(int d, int i);

}  // namespace qbc
