#pragma once

#include <cstdint>
#include <string>

#include "qbc/io.hpp"

namespace qbc {

inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr int kReportSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNotConverged = 3, kExitBoundViolated = 4 };

struct Tolerances {
    double bound = 1e-6;   // no-go bound slack
    double oracle = 1e-3;  // slack against the stabilized-norm oracle
    double prob = 1e-9;    // probabilities and closed forms
    double lemma = 1e-10;  // fidelity / trace-distance inequalities
};

struct ExperimentConfig {
    std::string command;
    std::string instance = "bell";
    std::string def_path;
    int d = 2;
    int mu = 1;
    double leak = 0.0;
    int trials = 0;  // 0 picks the command's default
    int attacks = 20;
    double min_gap = 0.0;  // separation gap to enforce; 0 disables the check
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out;
    Tolerances tol;
};

struct Report {
    Json json;
    int exit_code = kExitOk;
};

// Throws ConfigError for out-of-range parameters.
void check_config(const ExperimentConfig& c);

Report run_nogo(const ExperimentConfig& c);
Report run_shredder(const ExperimentConfig& c);
Report run_monster(const ExperimentConfig& c);
Report run_lemmas(const ExperimentConfig& c);
Report run_command(const ExperimentConfig& c);

// Skeleton shared by every report: schema, version, config echo.
Json report_header(const ExperimentConfig& c);
// Appends {"name", "pass", "margin"} to j["checks"] and keeps j["pass"] current.
void add_check(Json& j, const std::string& name, bool pass, double margin);

std::string dump_report(const Json& j);

}  // namespace qbc
