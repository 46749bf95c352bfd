#pragma once

#include <functional>
#include <vector>

#include "qbc/hybrid.hpp"
#include "qbc/numerics.hpp"

namespace qbc {

struct KrausBlock {
    Label label;
    int out_dim = 0;
    std::vector<CMatrix> kraus;
};

// Completely positive map in Schroedinger form with (optionally labeled)
// output blocks. Trace-preserving maps are channels; the trace-decreasing
// kind appears for compressed and composed operators.
class Channel {
public:
    enum class Kind { General, Depolarizing, RandomUnitary };

    static constexpr double kTol = 1e-9;

    Channel() = default;
    Channel(int in_dim, std::vector<KrausBlock> blocks, bool trace_preserving = true, double tol = kTol);

    static Channel from_kraus(std::vector<CMatrix> kraus, bool trace_preserving = true, double tol = kTol);
    static Channel identity(int d);
    static Channel unitary(const CMatrix& u);

    int in_dim() const { return in_dim_; }
    int out_dim() const;  // total over blocks
    const std::vector<KrausBlock>& blocks() const { return blocks_; }
    bool labeled() const { return blocks_.size() != 1 || !blocks_.front().label.empty(); }
    bool trace_preserving() const { return trace_preserving_; }
    std::size_t kraus_count() const;
    std::vector<int> block_offsets() const;

    // Kraus operators embedded into the flattened (block-diagonal) output.
    std::vector<CMatrix> flat_kraus() const;

    Kind kind() const { return kind_; }
    const std::vector<CMatrix>& unitaries() const { return unitaries_; }
    void tag(Kind kind, std::vector<CMatrix> unitaries = {});

private:
    int in_dim_ = 0;
    std::vector<KrausBlock> blocks_;
    bool trace_preserving_ = true;
    Kind kind_ = Kind::General;
    std::vector<CMatrix> unitaries_;
};

CMatrix apply_map(const Channel& c, const CMatrix& rho);
CMatrix apply_pure(const Channel& c, const CVector& psi);
CMatrix apply_adjoint(const Channel& c, const CMatrix& x);
DensityMatrix apply(const Channel& c, const DensityMatrix& rho);
HybridState apply_labeled(const Channel& c, const DensityMatrix& rho);

// Applies first, then second. When first has several output blocks, second
// acts on each of them and the labels are concatenated.
Channel compose(const Channel& first, const Channel& second);
Channel tensor(const Channel& a, const Channel& b);
Channel flatten(const Channel& c);
Channel measurement_channel(const std::vector<CMatrix>& kraus, const std::vector<Label>& labels);

struct DilationBlock {
    Label label;
    int dim_a = 1;
    int dim_b = 1;
};

// Isometry V from the input into a direct sum of Alice (A) tensor Bob (B)
// blocks. Rows of each block are ordered with the A index slowest.
struct StinespringDilation {
    CMatrix v;
    std::vector<DilationBlock> blocks;

    int in_dim() const { return static_cast<int>(v.cols()); }
    std::vector<Eigen::Index> offsets() const;
    CMatrix block(std::size_t i) const;
    void check(double tol = 1e-9) const;
};

StinespringDilation stinespring(const Channel& c);
// The channel seen by Bob: tracing the A factor in every block.
Channel bob_channel(const StinespringDilation& dil);
// Same dilation with every A factor padded by zero rows to dim_a.
StinespringDilation pad_alice(const StinespringDilation& dil, const std::vector<int>& dim_a);
// Embeds a multi-block dilation into the single block (sum A) x (sum B).
StinespringDilation embed_diagonal(const StinespringDilation& dil);

CMatrix choi(const Channel& c);
double channel_fidelity(const Channel& c);

struct MonteCarloEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    int samples = 0;
};

// Haar average of <psi|c(psi)|psi>. For trace-preserving maps this is
// (d Fc + 1)/(d + 1); the general form (d^2 Fc + tr c(1)) / (d (d + 1))
// also covers trace-decreasing maps.
double average_fidelity_exact(const Channel& c);
MonteCarloEstimate average_fidelity_mc(const Channel& c, int samples, Seed seed);

enum class ChoiPath { Auto, Dense, LowRank };
double cb_lower_choi(const Channel& a, const Channel& b, ChoiPath path = ChoiPath::Auto);

struct NormEstimate {
    double value = 0.0;
    CVector witness;
    int evaluations = 0;
};

// Lower estimate of the plain norm sup_psi ||(a - b)(psi)||_1 by Haar
// multistart plus monotone sign ascent.
NormEstimate op_norm_estimate(const Channel& a, const Channel& b, int trials, Seed seed);
// Lower estimate of the stabilized (diamond) norm over pure inputs on
// input x reference. Approximate; meant for small input dimensions.
NormEstimate diamond_estimate(const Channel& a, const Channel& b, int starts, Seed seed);

Channel depolarizing(int d);
Channel randomizing_channel(int d, int mu, Seed seed);
Channel random_unitary_channel(const std::vector<CMatrix>& unitaries);
long long mu_star(int d, double eps, double log_base = 0.0);  // log_base <= 0 means natural log
Channel measure_prepare(const std::vector<CMatrix>& povm, const std::vector<CMatrix>& states, double tol = 1e-9);
Channel random_channel(int in_dim, int out_dim, int kraus_count, Rng& rng);

struct EnergyConstraint {
    CMatrix h;
    double e = 0.0;
};

struct Truncation {
    CMatrix projector;
    int rank = 0;
    double bound = 0.0;
    Channel compressed;  // rho -> P c(P rho P) P, not renormalized

    DensityMatrix apply(const DensityMatrix& rho) const;
};

double truncation_bound(double gamma);
Truncation energy_truncate(const Channel& c, const EnergyConstraint& ec, double gamma, Seed check_seed = {7, 0},
                           int checks = 16);
CMatrix random_constrained_state(const EnergyConstraint& ec, Rng& rng);

struct FidelitySumResult {
    double value = 0.0;  // F^2(rho, omega) + F^2(sigma, omega) at the returned omega
    CMatrix omega;
    int iterations = 0;
};

// Maximizes F^2(rho, omega) + F^2(sigma, omega) over states omega by
// alternating over purifications.
FidelitySumResult maximize_fidelity_sum(const CMatrix& rho, const CMatrix& sigma, Seed seed, int restarts = 4);

}  // namespace qbc
