#include "qbc/report.hpp"

#include <algorithm>
#include <cmath>

#include "qbc/batteries.hpp"
#include "qbc/instances.hpp"
#include "qbc/parallel.hpp"

namespace qbc {

namespace {

// Stream indices of the derived seeds; recorded in every report.
constexpr std::uint64_t kAlignStream = 0x51a7;
constexpr std::uint64_t kOracleStream = 0xd1a3;
constexpr std::uint64_t kAttackStream = 0xa77a;
constexpr std::uint64_t kSeparationStream = 0x5e9a;

Json check_json(const InequalityCheck& c) {
    return Json{{"name", c.name},
                {"trials", c.trials},
                {"violations", c.violations},
                {"worst_margin", number(c.worst_margin)},
                {"tol", number(c.tol)}};
}

Json pair_json(const std::array<double, 2>& a) { return Json::array({number(a[0]), number(a[1])}); }

ProtocolDefinition nogo_protocol(const ExperimentConfig& c) {
    if (!c.def_path.empty()) return load_protocol(c.def_path);
    if (c.instance == "bell") return bell_protocol();
    if (c.instance == "anon") return anonymous_state_protocol(c.d, c.leak, Seed{c.seed, 0});
    throw ConfigError("unknown instance '" + c.instance + "' (expected bell or anon)");
}

int exit_for(const Json& j, bool converged) {
    if (!j["pass"].get<bool>()) return kExitBoundViolated;
    return converged ? kExitOk : kExitNotConverged;
}

}  // namespace

void check_config(const ExperimentConfig& c) {
    if (c.d < 2 || c.d > 64) throw ConfigError("--d must lie in [2, 64]");
    if (c.mu < 1 || c.mu > 4096) throw ConfigError("--mu must lie in [1, 4096]");
    if (!(c.leak >= 0.0 && c.leak <= 1.0)) throw ConfigError("--leak must lie in [0, 1]");
    if (c.trials < 0) throw ConfigError("--trials must be non-negative");
    if (c.attacks < 0) throw ConfigError("--attacks must be non-negative");
    if (c.workers < 1 || c.workers > 256) throw ConfigError("--workers must lie in [1, 256]");
    if (!(c.min_gap >= 0.0)) throw ConfigError("--min-gap must be non-negative");
    for (double t : {c.tol.bound, c.tol.oracle, c.tol.prob, c.tol.lemma})
        if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("tolerances must be finite and non-negative");
}

Json report_header(const ExperimentConfig& c) {
    Json config{{"command", c.command},
                {"instance", c.instance},
                {"def", c.def_path},
                {"d", c.d},
                {"mu", c.mu},
                {"leak", number(c.leak)},
                {"trials", c.trials},
                {"attacks", c.attacks},
                {"min_gap", number(c.min_gap)},
                {"seed", c.seed},
                {"workers", c.workers},
                {"tol",
                 Json{{"bound", number(c.tol.bound)},
                      {"oracle", number(c.tol.oracle)},
                      {"prob", number(c.tol.prob)},
                      {"lemma", number(c.tol.lemma)}}}};
    return Json{{"schema", "qbc-report"},
                {"schema_version", kReportSchemaVersion},
                {"library_version", kLibraryVersion},
                {"config", config},
                {"seeds",
                 Json{{"root", c.seed},
                      {"streams",
                       Json{{"align", kAlignStream},
                            {"oracle", kOracleStream},
                            {"attack", kAttackStream},
                            {"separation", kSeparationStream}}}}},
                {"checks", Json::array()},
                {"pass", true}};
}

void add_check(Json& j, const std::string& name, bool pass, double margin) {
    j["checks"].push_back(Json{{"name", name}, {"pass", pass}, {"margin", number(margin)}});
    j["pass"] = j["pass"].get<bool>() && pass;
}

std::string dump_report(const Json& j) { return j.dump(2) + "\n"; }

Report run_nogo(const ExperimentConfig& c) {
    check_config(c);
    const ProtocolDefinition p = nogo_protocol(c);
    AlignOptions opts;
    opts.seed = Seed{c.seed, kAlignStream};

    const Channel g0 = register_channel(p.tree, p.alice[0], p.bobs, p.rho0);
    const Channel g1 = register_channel(p.tree, p.alice[1], p.bobs, p.rho0);
    const CheatPlan plan = synthesize_cheat(p, opts);
    SecurityReport s = evaluate_cheat(p, plan);
    s.eps_lower = cb_lower_choi(g0, g1);
    s.eps_upper = 2.0 * plan.align.value;
    s.state_distance = state_distance(p);

    Json j = report_header(c);
    j["protocol"] = Json{{"name", p.name}, {"nodes", p.tree.nodes().size()}, {"register_size", p.bobs.members.size()}};
    Json members = Json::array();
    for (const auto& m : p.bobs.members) members.push_back(m.name);
    j["protocol"]["members"] = members;

    Json unitaries = Json::array();
    for (std::size_t i = 0; i < plan.unitaries.size(); ++i)
        unitaries.push_back(Json{{"label", label_to_json(plan.labels[i])}, {"unitary", matrix_to_json(plan.unitaries[i])}});
    Json per_bob = Json::array();
    for (const auto& o : s.per_bob)
        per_bob.push_back(Json{{"name", o.name},
                               {"distance", pair_json(o.distance)},
                               {"honest_accept", pair_json(o.honest_accept)},
                               {"cheat_accept", pair_json(o.cheat_accept)}});
    Json results{{"eps_lower", number(s.eps_lower)},
                 {"eps_upper", number(s.eps_upper)},
                 {"state_distance", number(s.state_distance)},
                 {"delta_hat", number(s.delta_hat)},
                 {"eta", number(s.eta)},
                 {"accept_gap", number(s.accept_gap)},
                 {"align",
                  Json{{"value", number(plan.align.value)},
                       {"lower_bound", number(plan.align.lower_bound)},
                       {"converged", plan.align.converged},
                       {"padded", plan.align.padded},
                       {"iterations", plan.align.iterations},
                       {"unitaries", unitaries}}},
                 {"per_bob", per_bob}};

    add_check(j, "delta_hat_le_2sqrt_eps_upper", s.delta_hat <= 2.0 * std::sqrt(s.eps_upper) + c.tol.bound,
              2.0 * std::sqrt(s.eps_upper) - s.delta_hat);
    add_check(j, "delta_hat_le_2_align", s.delta_hat <= 2.0 * plan.align.value + 1e-9,
              2.0 * plan.align.value - s.delta_hat);
    add_check(j, "eps_lower_le_eps_upper", s.eps_lower <= s.eps_upper + 1e-9, s.eps_upper - s.eps_lower);
    if (g0.in_dim() <= 4) {
        const double oracle = diamond_estimate(g0, g1, 8, Seed{c.seed, kOracleStream}).value;
        results["eps_oracle"] = number(oracle);
        const double v = plan.align.value;
        add_check(j, "delta_hat_le_2sqrt_eps_oracle", s.delta_hat <= 2.0 * std::sqrt(oracle) + c.tol.oracle,
                  2.0 * std::sqrt(oracle) - s.delta_hat);
        add_check(j, "align_sq_le_eps_oracle", v * v <= oracle + c.tol.oracle, oracle - v * v);
        add_check(j, "eps_oracle_le_2_align", oracle <= 2.0 * v + c.tol.oracle, 2.0 * v - oracle);
    } else {
        results["eps_oracle"] = nullptr;
    }
    j["results"] = results;
    return Report{j, exit_for(j, plan.align.converged)};
}

Report run_shredder(const ExperimentConfig& c) {
    check_config(c);
    const int trials = c.trials > 0 ? c.trials : 20;
    const ShredderInstance inst = shredder_build(c.d);
    const double target = 1.0 / c.d;
    const ShredderOutcome ident = shredder_eval(inst, Channel::identity(c.d));
    const auto rows = parallel_map(static_cast<std::size_t>(trials), c.workers, [&](std::size_t i) {
        Rng rng = Seed{c.seed, 0}.child(i).rng();
        return shredder_eval(inst, random_channel(c.d, c.d, 1 + static_cast<int>(i % 3), rng));
    });
    double worst = std::max(std::abs(ident.success_as_1 - target), std::abs(ident.success_as_0 - target));
    double mean = 0.0;
    Json table = Json::array();
    for (const auto& r : rows) {
        worst = std::max({worst, std::abs(r.success_as_1 - target), std::abs(r.success_as_0 - target)});
        mean += r.success_as_1;
        table.push_back(Json{{"success_as_1", number(r.success_as_1)}, {"success_as_0", number(r.success_as_0)}});
    }
    mean /= trials;
    double var = 0.0;
    for (const auto& r : rows) var += (r.success_as_1 - mean) * (r.success_as_1 - mean);
    var = trials > 1 ? var / (trials - 1) : 0.0;
    const double marg = shredder_marginal_error(inst);

    Json j = report_header(c);
    j["results"] = Json{{"target", number(target)},
                        {"identity", Json{{"success_as_1", number(ident.success_as_1)}, {"success_as_0", number(ident.success_as_0)}}},
                        {"random", table},
                        {"max_deviation", number(worst)},
                        {"variance", number(var)},
                        {"marginal_error", number(marg)}};
    add_check(j, "success_is_one_over_d", worst <= c.tol.prob, c.tol.prob - worst);
    add_check(j, "success_variance", var <= 1e-18, 1e-18 - var);
    add_check(j, "bob_marginals_maximally_mixed", marg <= 1e-12, 1e-12 - marg);
    return Report{j, exit_for(j, true)};
}

Report run_monster(const ExperimentConfig& c) {
    check_config(c);
    const int trials = c.trials > 0 ? c.trials : 1000;
    const MonsterInstance inst = monster_build(c.d, c.mu, Seed{c.seed, 0});
    const double d = c.d;
    Json j = report_header(c);
    Json results;

    const double cb = cb_lower_choi(inst.randomizing, inst.depolarizing);
    const double choi_bound = 2.0 - 2.0 * c.mu / (d * d);
    results["cb_lower"] = number(cb);
    results["choi_bound"] = number(choi_bound);
    add_check(j, "cb_lower_ge_choi_bound", cb >= choi_bound - 1e-9, cb - choi_bound);
    if (c.mu == 1) add_check(j, "cb_lower_eq_choi_bound", std::abs(cb - choi_bound) <= 1e-9, 1e-9 - std::abs(cb - choi_bound));

    if (c.d <= 16) {
        const double restr = (choi(bob_channel(inst.v0)) - choi(inst.randomizing)).cwiseAbs().maxCoeff();
        results["restriction_error"] = number(restr);
        add_check(j, "dilation_restricts_to_randomizing", restr <= 1e-10, 1e-10 - restr);
    }

    const PassiveCheat pc = monster_passive_cheat(inst, c.tol.prob);
    results["passive"] = Json{{"probability", number(pc.probability)},
                              {"channel_fidelity", number(pc.channel_fidelity)},
                              {"delta_hat", number(pc.delta_hat)},
                              {"chain_mid", number(pc.chain_mid)},
                              {"chain_right", number(pc.chain_right)}};
    add_check(j, "passive_chain", pc.chain_holds,
              std::min(pc.chain_mid - pc.cb_lower, pc.chain_right - pc.chain_mid));
    add_check(j, "passive_le_one_over_d_plus_delta", pc.bound_holds, 1.0 / d + pc.delta_hat - pc.probability);

    const std::array<double, 2> honest{monster_honest_acceptance(inst, 0), monster_honest_acceptance(inst, 1)};
    results["honest_acceptance"] = pair_json(honest);
    const double sound = std::max(std::abs(1.0 - honest[0]), std::abs(1.0 - honest[1]));
    add_check(j, "honest_acceptance_is_one", sound <= 1e-10, 1e-10 - sound);

    if (c.d <= 16) {
        const AttackOutcome passive = monster_general_attack(inst, monster_passive_attack(inst), cb, c.tol.prob);
        const AttackOutcome hon = monster_general_attack(inst, monster_honest_attack(inst), cb, c.tol.prob);
        const double embed = std::abs(passive.probability - (0.5 + 0.5 * pc.probability));
        add_check(j, "passive_attack_matches_passive_cheat", embed <= c.tol.prob, c.tol.prob - embed);
        add_check(j, "honest_attack_opens_committed_bit", std::abs(1.0 - hon.accept[0]) <= 1e-10,
                  1e-10 - std::abs(1.0 - hon.accept[0]));
        const auto outcomes = parallel_map(static_cast<std::size_t>(c.attacks), c.workers, [&](std::size_t i) {
            Rng rng = Seed{c.seed, kAttackStream}.child(i).rng();
            return monster_general_attack(inst, monster_random_attack(inst, 2 + static_cast<int>(i % 3), rng), cb,
                                          c.tol.prob);
        });
        Json table = Json::array();
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& o : outcomes) {
            table.push_back(Json{{"accept", pair_json(o.accept)}, {"probability", number(o.probability)}});
            worst = std::min(worst, o.bound - o.probability);
        }
        const double bound = outcomes.empty() ? 0.5 + 1.0 / d + 0.5 * std::sqrt(std::max(0.0, 2.0 - cb)) : outcomes.front().bound;
        results["attacks"] = Json{{"bound", number(bound)}, {"random", table}};
        if (!outcomes.empty()) add_check(j, "random_attacks_within_bound", worst >= -c.tol.prob, worst);
    } else {
        results["attacks"] = nullptr;
    }

    const Separation sep = monster_separation(inst, trials, Seed{c.seed, kSeparationStream});
    results["separation"] = Json{{"op_estimate", number(sep.op_estimate)},
                                 {"gap", number(sep.gap)},
                                 {"trials", trials},
                                 {"evaluations", sep.evaluations}};
    if (c.min_gap > 0.0) add_check(j, "separation_gap", sep.gap >= c.min_gap, sep.gap - c.min_gap);
    j["results"] = results;
    return Report{j, exit_for(j, true)};
}

Report run_lemmas(const ExperimentConfig& c) {
    check_config(c);
    const int trials = c.trials > 0 ? c.trials : 1000;
    const Seed root{c.seed, 0};
    Json j = report_header(c);
    Json batteries = Json::array();
    auto add = [&](const InequalityCheck& k) {
        batteries.push_back(check_json(k));
        add_check(j, k.name, k.pass(), k.worst_margin);
    };
    for (const auto& k : fidelity_trace_battery(trials, root.child(1), c.workers, c.tol.lemma)) add(k);
    for (const auto& k : fidelity_sum_battery(std::max(1, trials / 10), root.child(2), c.workers)) add(k);
    add(bystander_battery(std::max(1, trials / 20), root.child(3), c.workers));
    add(classical_register_battery(std::max(1, trials / 20), root.child(4), c.workers));
    for (const auto& k : energy_battery(std::max(1, trials / 10), {0.01, 0.1, 0.25}, root.child(5), c.workers)) add(k);

    const auto fids = average_fidelity_battery(5, 4, 20000, root.child(6), c.workers);
    Json fid = Json::array();
    double worst_z = 0.0;
    for (const auto& f : fids) {
        fid.push_back(Json{{"exact", number(f.exact)}, {"mc", number(f.mc.mean)}, {"stderr", number(f.mc.stderr_)}, {"z", number(f.z)}});
        worst_z = std::max(worst_z, f.z);
    }
    add_check(j, "average_fidelity_mc_within_3_stderr", worst_z <= 3.0, 3.0 - worst_z);

    const KsResult ks = haar_phase_ks(10000, 0.01, root.child(7));
    add_check(j, "haar_eigenphase_ks", ks.pass(), ks.critical - ks.statistic);

    j["results"] = Json{{"batteries", batteries},
                        {"average_fidelity", fid},
                        {"ks", Json{{"samples", ks.samples}, {"statistic", number(ks.statistic)}, {"critical", number(ks.critical)}}}};
    return Report{j, exit_for(j, true)};
}

Report run_command(const ExperimentConfig& c) {
    if (c.command == "nogo") return run_nogo(c);
    if (c.command == "shredder") return run_shredder(c);
    if (c.command == "monster") return run_monster(c);
    if (c.command == "lemmas") return run_lemmas(c);
    throw ConfigError("unknown command '" + c.command + "'");
}

}  // namespace qbc
