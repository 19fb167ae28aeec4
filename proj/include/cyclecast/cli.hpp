#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace cyclecast::cli {

// Everything a single invocation needs, fully resolved: flag parsing happens
// in the binary's main(), which hands a RunConfig to run_command.
struct RunConfig {
    std::string command;  // gen | eval | report | plotdata

    // Shared
    std::uint64_t seed = 42;
    std::string out_path;

    // gen
    int case_id = 1;  // 1..3 regularity regimes
    int n_cycles = 120;
    std::string config_out;  // optional generator-config echo file

    // eval
    std::string in_path;  // series CSV
    std::vector<std::string> models = {"ols",  "huber", "lasso",
                                       "omp",  "arima", "lstm"};
    int window_len = 3;  // L: lag records per input window
    int target_len = 1;  // P: records predicted per window (1 supported)
    int horizon = 14;
    std::string protocol = "recursive";  // recursive | rolling
    std::string channels = "both";       // both | cycle | period
    bool round_predictions = false;
    bool save_fits = false;
    double delta = 1.35;    // Huber knee
    double lambda = 1.0;    // Lasso penalty
    int k = 1;              // OMP predictor budget
    int p = 1, d = 1, q = 1;  // ARIMA orders
    int epochs = 0;         // 0: per-case default (100 for case 1, else 1600)
    double learning_rate = 1e-3;
    std::string arch;       // "", "case1", "stacked"; "" follows --case
    bool case_given = false;  // eval --case hint present

    // report
    std::vector<std::string> eval_inputs;
    std::string gen_config_path;  // optional
    std::string series_path;      // report: summary echo; plotdata: input

    // plotdata
    std::string predictions_path;
    std::string loss_path;
    std::string out_dir = ".";
};

// Seed fallback: the CYCLECAST_SEED environment variable when set and
// parseable, 42 otherwise. Flags override it.
std::uint64_t default_seed();

// The throwing command bodies. Progress/result text goes to `out`; files are
// written atomically.
void run_gen(const RunConfig& config, std::ostream& out);
void run_eval(const RunConfig& config, std::ostream& out);
void run_report(const RunConfig& config, std::ostream& out);
void run_plotdata(const RunConfig& config, std::ostream& out);

// Dispatches on config.command and maps exceptions to the exit-code
// contract: 0 success, 1 validation or user error (bad flags, malformed
// CSV, insufficient history, infeasible generator bounds, divergence),
// 2 I/O or unexpected internal failure. Error text goes to `err`.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace cyclecast::cli
