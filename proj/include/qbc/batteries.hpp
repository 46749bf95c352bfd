#pragma once

#include <string>
#include <vector>

#include "qbc/channels.hpp"

namespace qbc {

// Outcome of checking lhs <= rhs + tol over many samples. The margin is
// rhs - lhs; its minimum is reported.
struct InequalityCheck {
    std::string name;
    int trials = 0;
    int violations = 0;
    double worst_margin = 0.0;
    double tol = 0.0;

    void record(double lhs, double rhs);
    bool pass() const { return violations == 0; }
};

// 1 - F <= T <= sqrt(1 - F^2) with T half the trace distance.
std::vector<InequalityCheck> fidelity_trace_battery(int pairs, Seed seed, int workers = 1, double tol = 1e-10);

// The fidelity-sum optimizer reaches 1 + F within reach_tol and never
// exceeds it by more than excess_tol.
std::vector<InequalityCheck> fidelity_sum_battery(int pairs, Seed seed, int workers = 1, double reach_tol = 1e-3,
                                                  double excess_tol = 1e-9);

// L = R1 - R2 for random channels. With a measure-and-prepare bystander D,
// the sampled ||(L x D)(rho)||_1 stays below the sampled ||L||.
InequalityCheck bystander_battery(int pairs, Seed seed, int workers = 1, double tol = 1e-6);
// Same with a classical side register carried along untouched.
InequalityCheck classical_register_battery(int pairs, Seed seed, int workers = 1, double tol = 1e-6);

// Channel mapping states with tr(rho H) <= E to states with the same
// property: a mixture of diagonal phase unitaries, decay towards the ground
// state and replacement by a fixed constrained state. H must be diagonal
// with increasing entries.
Channel energy_respecting_channel(const EnergyConstraint& ec, Rng& rng);

// ||c(rho) - truncated(rho)||_1 <= 4 sqrt(gamma) + 2 gamma / (1 - gamma) for
// H = diag(0..d-1), d <= 16.
std::vector<InequalityCheck> energy_battery(int pairs, const std::vector<double>& gammas, Seed seed, int workers = 1);

struct FidelityComparison {
    double exact = 0.0;
    MonteCarloEstimate mc;
    double z = 0.0;  // |mc - exact| / stderr
};

std::vector<FidelityComparison> average_fidelity_battery(int channels, int d, int samples, Seed seed,
                                                         int workers = 1);

struct KsResult {
    int samples = 0;
    double statistic = 0.0;
    double critical = 0.0;
    bool pass() const { return statistic <= critical; }
};

// Kolmogorov-Smirnov test of a randomly chosen eigenphase of Haar U(2)
// samples against the uniform law on the circle.
KsResult haar_phase_ks(int samples, double alpha, Seed seed);

}  // namespace qbc
