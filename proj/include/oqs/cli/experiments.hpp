// Experiment orchestration: runs one named experiment from a typed config and
// writes result.json (metadata, verdicts, norms) plus series.csv (plot-ready
// time series) into the output directory.

#pragma once

#include <cstdint>
#include <string>

#include "oqs/cli/config.hpp"

namespace oqs::cli {

struct RunOptions {
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int jobs = 0;  // 0 = OQSCP_NUM_THREADS or hardware concurrency
    bool quiet = false;
};

// Resolved worker count honoring --jobs and OQSCP_NUM_THREADS.
int worker_count(const RunOptions& opts);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// Runs the experiment and writes <out>/result.json and <out>/series.csv.
// Throws on numerical failure; the caller maps exceptions to exit codes.
void run_experiment(const ExperimentConfig& cfg, const OracleConfig& oracle,
                    const RunOptions& opts);

}  // namespace oqs::cli
