#include <iostream>

#include "CLI11.hpp"
#include "oqs/cli/experiments.hpp"

namespace {

// exit codes: 0 success, 2 config/validation error, 3 numerical failure
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

int run(const std::string& experiment, const std::string& config_path,
        const oqs::cli::RunOptions& opts, bool validate_only) {
    oqs::cli::ConfigFile file;
    try {
        file = oqs::cli::parse_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    }

    const std::vector<std::string> diags = oqs::cli::validate_config(file, experiment);
    if (validate_only) {
        for (const std::string& d : diags) std::cout << d << "\n";
        if (diags.empty() && !opts.quiet) std::cout << "config ok\n";
        return diags.empty() ? 0 : exit_config;
    }
    if (!diags.empty()) {
        for (const std::string& d : diags) std::cerr << "config error: " << d << "\n";
        return exit_config;
    }

    try {
        const oqs::cli::ExperimentConfig cfg =
            oqs::cli::load_experiment_config(file, experiment);
        const oqs::cli::OracleConfig oracle = oqs::cli::load_oracle_config(file);
        oqs::cli::run_experiment(cfg, oracle, opts);
    } catch (const std::runtime_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"oqscp: weak-coupling reduced-dynamics laboratory"};
    app.require_subcommand(0, 1);

    std::string config_path;
    oqs::cli::RunOptions opts;
    bool validate_only = false;

    std::vector<CLI::App*> subs;
    for (const std::string& name : oqs::cli::experiment_names()) {
        subs.push_back(app.add_subcommand(name, "run the " + name + " experiment"));
    }
    subs.push_back(app.add_subcommand("validate", "validate a config without running"));
    std::string validate_experiment = "evolve";
    subs.back()->add_option("--experiment", validate_experiment,
                            "experiment to validate against");

    for (CLI::App* sub : subs) {
        sub->add_option("--config", config_path, "config file path")->required();
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--seed", opts.seed, "random seed (recorded in result.json)");
        sub->add_option("--jobs", opts.jobs, "worker pool size");
        sub->add_flag("--quiet", opts.quiet, "suppress progress output");
    }

    CLI11_PARSE(app, argc, argv);

    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return exit_config;
    }
    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "validate") {
        validate_only = true;
        return run(validate_experiment, config_path, opts, true);
    }
    return run(sub, config_path, opts, false);
}
