#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "qbc/report.hpp"

namespace {

void add_common(CLI::App* sub, qbc::ExperimentConfig& c) {
    sub->add_option("--seed", c.seed, "Root seed")->envname("QBC_SEED");
    sub->add_option("--out", c.out, "Report path (stdout if omitted)")->envname("QBC_OUT");
    sub->add_option("--workers", c.workers, "Worker threads; reports do not depend on it")->envname("QBC_WORKERS");
    sub->add_option("--trials", c.trials, "Trial count (0 = command default)")->envname("QBC_TRIALS");
    sub->add_option("--tol-bound", c.tol.bound, "Slack on the no-go bound")->envname("QBC_TOL_BOUND");
    sub->add_option("--tol-oracle", c.tol.oracle, "Slack against the diamond-norm oracle")->envname("QBC_TOL_ORACLE");
    sub->add_option("--tol-prob", c.tol.prob, "Slack on probabilities")->envname("QBC_TOL_PROB");
    sub->add_option("--tol-lemma", c.tol.lemma, "Slack on fidelity inequalities")->envname("QBC_TOL_LEMMA");
}

}  // namespace

int main(int argc, char** argv) {
    qbc::ExperimentConfig c;
    CLI::App app{"Security analysis of quantum bit commitment protocols"};
    app.set_version_flag("--version", qbc::kLibraryVersion);
    app.require_subcommand(1);

    auto* nogo = app.add_subcommand("nogo", "Synthesize and score a cheating strategy");
    add_common(nogo, c);
    nogo->add_option("--instance", c.instance, "bell | anon")->envname("QBC_INSTANCE");
    nogo->add_option("--def", c.def_path, "Protocol definition JSON")->envname("QBC_DEF");
    nogo->add_option("--d", c.d, "Local dimension of the anonymous-state instance")->envname("QBC_D");
    nogo->add_option("--leak", c.leak, "Phase leak of the anonymous-state instance")->envname("QBC_LEAK");

    auto* shredder = app.add_subcommand("shredder", "Local-decoding shredder experiment");
    add_common(shredder, c);
    shredder->add_option("--d", c.d, "Dimension")->envname("QBC_D");

    auto* monster = app.add_subcommand("monster", "Randomizing versus depolarizing channel pair");
    add_common(monster, c);
    monster->add_option("--d", c.d, "Dimension")->envname("QBC_D");
    monster->add_option("--mu", c.mu, "Number of random unitaries")->envname("QBC_MU");
    monster->add_option("--attacks", c.attacks, "Random general attacks (d <= 16)")->envname("QBC_ATTACKS");
    monster->add_option("--min-gap", c.min_gap, "Required separation gap; 0 disables")->envname("QBC_MIN_GAP");

    auto* lemmas = app.add_subcommand("lemmas", "Inequality batteries");
    add_common(lemmas, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return qbc::kExitConfig;
    }
    c.command = app.get_subcommands().front()->get_name();

    qbc::Report r;
    try {
        r = qbc::run_command(c);
    } catch (const qbc::ExplosionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qbc::kExitNotConverged;
    } catch (const qbc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qbc::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    r.json["exit_code"] = r.exit_code;
    const std::string text = qbc::dump_report(r.json);
    if (c.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(c.out, std::ios::binary);
        if (!(f << text)) {
            std::cerr << "error: cannot write " << c.out << "\n";
            return qbc::kExitConfig;
        }
    }
    return r.exit_code;
}
