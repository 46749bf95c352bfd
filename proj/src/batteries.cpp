#include "qbc/batteries.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "qbc/parallel.hpp"

namespace qbc {

void InequalityCheck::record(double lhs, double rhs) {
    const double margin = rhs - lhs;
    if (trials == 0 || margin < worst_margin) worst_margin = margin;
    ++trials;
    if (lhs > rhs + tol) ++violations;
}

namespace {

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

CMatrix random_state_any_rank(int d, Rng& rng) { return random_density(d, uniform_int(rng, 1, d), rng); }

double map_difference_norm(const Channel& a, const Channel& b, const CMatrix& rho) {
    return trace_norm(apply_map(a, rho) - apply_map(b, rho));
}

struct NormSample {
    double joint = 0.0;        // sampled norm with the side system attached
    double plain = 0.0;        // sampled norm of the bare difference
    double conditional = 0.0;  // best norm over the conditional inputs
};

// Sampled plain norm of R1 - R2.
double plain_estimate(const Channel& r1, const Channel& r2, Seed seed) {
    return op_norm_estimate(r1, r2, 8, seed).value;
}

InequalityCheck fold(const std::string& name, double tol, const std::vector<NormSample>& samples) {
    InequalityCheck c{name, 0, 0, 0.0, tol};
    for (const auto& s : samples) c.record(s.joint, std::max(s.plain, s.conditional));
    return c;
}

}  // namespace

std::vector<InequalityCheck> fidelity_trace_battery(int pairs, Seed seed, int workers, double tol) {
    struct Row {
        double f, t;
    };
    const auto rows = parallel_map(static_cast<std::size_t>(pairs), workers, [&](std::size_t i) {
        Rng rng = seed.child(i).rng();
        const int d = 2 + static_cast<int>(i % 4);
        const CMatrix rho = random_state_any_rank(d, rng);
        const CMatrix sigma = random_state_any_rank(d, rng);
        return Row{fidelity(rho, sigma), 0.5 * trace_norm(rho - sigma)};
    });
    InequalityCheck lower{"one_minus_fidelity_le_trace_distance", 0, 0, 0.0, tol};
    InequalityCheck upper{"trace_distance_le_sqrt_one_minus_fidelity_sq", 0, 0, 0.0, tol};
    for (const auto& r : rows) {
        lower.record(1.0 - r.f, r.t);
        upper.record(r.t, std::sqrt(std::max(0.0, 1.0 - r.f * r.f)));
    }
    return {lower, upper};
}

std::vector<InequalityCheck> fidelity_sum_battery(int pairs, Seed seed, int workers, double reach_tol,
                                                  double excess_tol) {
    struct Row {
        double target, value;
    };
    const auto rows = parallel_map(static_cast<std::size_t>(pairs), workers, [&](std::size_t i) {
        Rng rng = seed.child(i).rng();
        const int d = 2 + static_cast<int>(i % 3);
        const CMatrix rho = random_state_any_rank(d, rng);
        const CMatrix sigma = random_state_any_rank(d, rng);
        const FidelitySumResult r = maximize_fidelity_sum(rho, sigma, seed.child(i).child(1));
        return Row{1.0 + fidelity(rho, sigma), r.value};
    });
    InequalityCheck reach{"optimizer_reaches_one_plus_fidelity", 0, 0, 0.0, reach_tol};
    InequalityCheck excess{"optimizer_never_exceeds_one_plus_fidelity", 0, 0, 0.0, excess_tol};
    for (const auto& r : rows) {
        reach.record(r.target, r.value);
        excess.record(r.value, r.target);
    }
    return {reach, excess};
}

InequalityCheck bystander_battery(int pairs, Seed seed, int workers, double tol) {
    const auto samples = parallel_map(static_cast<std::size_t>(pairs), workers, [&](std::size_t i) {
        Rng rng = seed.child(i).rng();
        const int n = 2 + static_cast<int>(i % 2);
        const int m = 2 + static_cast<int>((i / 2) % 2);
        const Channel r1 = random_channel(n, n, uniform_int(rng, 1, 3), rng);
        const Channel r2 = random_channel(n, n, uniform_int(rng, 1, 3), rng);
        const int outcomes = uniform_int(rng, 2, 3);
        const CMatrix v = random_isometry(outcomes * m, m, rng);
        std::vector<CMatrix> povm, states;
        for (int x = 0; x < outcomes; ++x) {
            const CMatrix block = v.middleRows(static_cast<Eigen::Index>(x) * m, m);
            povm.push_back(block.adjoint() * block);
            states.push_back(random_state_any_rank(m, rng));
        }
        const Channel d = measure_prepare(povm, states);
        const Channel joint1 = tensor(r1, d), joint2 = tensor(r2, d);
        NormSample s;
        s.plain = plain_estimate(r1, r2, seed.child(i).child(1));
        for (int k = 0; k < 8; ++k) {
            const CMatrix rho = k < 6 ? projector(haar_state(n * m, rng)) : random_state_any_rank(n * m, rng);
            s.joint = std::max(s.joint, map_difference_norm(joint1, joint2, rho));
            for (const auto& effect : povm) {
                const CMatrix part = hermitian_part(partial_trace(rho * kron(identity(n), effect), {n, m}, {0}));
                const double p = part.trace().real();
                if (p > 1e-12) s.conditional = std::max(s.conditional, map_difference_norm(r1, r2, part / p));
            }
        }
        return s;
    });
    return fold("measure_prepare_bystander_does_not_raise_norm", tol, samples);
}

InequalityCheck classical_register_battery(int pairs, Seed seed, int workers, double tol) {
    const auto samples = parallel_map(static_cast<std::size_t>(pairs), workers, [&](std::size_t i) {
        Rng rng = seed.child(i).rng();
        const int n = 2 + static_cast<int>(i % 2);
        const int k = 2 + static_cast<int>((i / 2) % 3);
        const Channel r1 = random_channel(n, n, uniform_int(rng, 1, 3), rng);
        const Channel r2 = random_channel(n, n, uniform_int(rng, 1, 3), rng);
        const Channel joint1 = tensor(r1, Channel::identity(k)), joint2 = tensor(r2, Channel::identity(k));
        NormSample s;
        s.plain = plain_estimate(r1, r2, seed.child(i).child(1));
        for (int t = 0; t < 8; ++t) {
            const CMatrix full = t < 4 ? projector(haar_state(n * k, rng)) : random_state_any_rank(n * k, rng);
            CMatrix cq = CMatrix::Zero(n * k, n * k);
            for (int x = 0; x < k; ++x) {
                const CMatrix px = kron(identity(n), projector(basis_vector(k, x)));
                const CMatrix branch = px * full * px;
                cq += branch;
                const CMatrix part = hermitian_part(partial_trace(branch, {n, k}, {0}));
                const double p = part.trace().real();
                if (p > 1e-12) s.conditional = std::max(s.conditional, map_difference_norm(r1, r2, part / p));
            }
            s.joint = std::max(s.joint, map_difference_norm(joint1, joint2, cq));
        }
        return s;
    });
    return fold("classical_register_does_not_raise_norm", tol, samples);
}

Channel energy_respecting_channel(const EnergyConstraint& ec, Rng& rng) {
    const int d = static_cast<int>(ec.h.rows());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<double, std::vector<CMatrix>>> parts;

    const int phases = uniform_int(rng, 1, 2);
    for (int u = 0; u < phases; ++u) {
        CMatrix diag = CMatrix::Zero(d, d);
        for (int j = 0; j < d; ++j) diag(j, j) = std::polar(1.0, 2.0 * kPi * unit(rng));
        parts.push_back({unit(rng), {diag}});
    }

    const double p = unit(rng);
    CMatrix keep = CMatrix::Identity(d, d) * std::sqrt(1.0 - p);
    keep(0, 0) = 1.0;
    CMatrix lower = CMatrix::Zero(d, d);
    for (int j = 1; j < d; ++j) lower(j - 1, j) = std::sqrt(p);
    parts.push_back({unit(rng), {keep, lower}});

    const CMatrix sigma = random_constrained_state(ec, rng);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(sigma));
    std::vector<CMatrix> replace;
    for (int k = 0; k < d; ++k) {
        const double lam = es.eigenvalues()(k);
        if (lam <= 0.0) continue;
        for (int j = 0; j < d; ++j) replace.push_back(std::sqrt(lam) * es.eigenvectors().col(k) * basis_vector(d, j).adjoint());
    }
    // Eigenvalue clipping can leave the replacement slightly short of
    // trace one; renormalize its Kraus set.
    CMatrix sum = CMatrix::Zero(d, d);
    for (const auto& k : replace) sum += k.adjoint() * k;
    const double scale = 1.0 / std::sqrt(sum(0, 0).real());
    for (auto& k : replace) k *= scale;
    parts.push_back({unit(rng), replace});

    double total = 0.0;
    for (const auto& part : parts) total += part.first;
    std::vector<CMatrix> kraus;
    for (const auto& [w, ks] : parts)
        for (const auto& k : ks) kraus.push_back(std::sqrt(w / total) * k);
    return Channel::from_kraus(std::move(kraus));
}

std::vector<InequalityCheck> energy_battery(int pairs, const std::vector<double>& gammas, Seed seed, int workers) {
    std::vector<InequalityCheck> out;
    for (std::size_t g = 0; g < gammas.size(); ++g) {
        const double gamma = gammas[g];
        const auto rows = parallel_map(static_cast<std::size_t>(pairs), workers, [&](std::size_t i) {
            const Seed s = seed.child(g).child(i);
            Rng rng = s.rng();
            const int d = uniform_int(rng, 4, 16);
            EnergyConstraint ec;
            ec.h = CMatrix::Zero(d, d);
            for (int j = 0; j < d; ++j) ec.h(j, j) = j;
            ec.e = std::uniform_real_distribution<double>(0.2, 2.0)(rng);
            const Channel c = energy_respecting_channel(ec, rng);
            const Truncation t = energy_truncate(c, ec, gamma, s.child(1));
            const CMatrix rho = random_constrained_state(ec, rng);
            const CMatrix exact = apply_map(c, rho);
            return trace_norm(exact - t.apply(DensityMatrix(rho, 1e-9)).matrix());
        });
        InequalityCheck c{"truncation_error_gamma_" + std::to_string(gamma).substr(0, 4), 0, 0, 0.0, 0.0};
        for (double lhs : rows) c.record(lhs, truncation_bound(gamma));
        out.push_back(c);
    }
    return out;
}

std::vector<FidelityComparison> average_fidelity_battery(int channels, int d, int samples, Seed seed,
                                                         int workers) {
    return parallel_map(static_cast<std::size_t>(channels), workers, [&](std::size_t i) {
        Rng rng = seed.child(i).rng();
        const Channel c = random_channel(d, d, 1 + static_cast<int>(i % 3), rng);
        FidelityComparison f;
        f.exact = average_fidelity_exact(c);
        f.mc = average_fidelity_mc(c, samples, seed.child(i).child(1));
        f.z = f.mc.stderr_ > 0.0 ? std::abs(f.mc.mean - f.exact) / f.mc.stderr_
                                 : (f.mc.mean == f.exact ? 0.0 : std::numeric_limits<double>::infinity());
        return f;
    });
}

KsResult haar_phase_ks(int samples, double alpha, Seed seed) {
    if (samples < 1) throw DomainError("haar_phase_ks: need samples");
    Rng rng = seed.rng();
    std::vector<double> u;
    u.reserve(samples);
    for (int s = 0; s < samples; ++s) {
        const CMatrix v = haar_unitary(2, rng);
        Eigen::ComplexEigenSolver<CMatrix> es(v, false);
        const int pick = static_cast<int>(rng() & 1u);
        u.push_back((std::arg(es.eigenvalues()(pick)) + kPi) / (2.0 * kPi));
    }
    std::sort(u.begin(), u.end());
    KsResult r;
    r.samples = samples;
    for (int i = 0; i < samples; ++i) {
        r.statistic = std::max(r.statistic, (i + 1.0) / samples - u[i]);
        r.statistic = std::max(r.statistic, u[i] - static_cast<double>(i) / samples);
    }
    r.critical = std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(samples));
    return r;
}

}  // namespace qbc
