#include <algorithm>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "transducer/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Microwave-to-optical transducer simulator"};
    app.require_subcommand(0, 0);

    std::string experiment;
    transducer::RunOptions opts;
    if (const char* env = std::getenv("TRANSDUCER_OUT_DIR")) opts.out_dir = env;

    std::string experiments_help;
    for (const auto& n : transducer::experiment_names())
        experiments_help += (experiments_help.empty() ? "" : ", ") + n;

    app.add_option("experiment", experiment, "one of: " + experiments_help)->required();
    app.add_option("--config", opts.config_path, "JSON config file (defaults when omitted)");
    app.add_option("--out", opts.out_dir, "output directory (default $TRANSDUCER_OUT_DIR or ./out)");
    app.add_option("--set", opts.overrides, "config override key=value (repeatable)");
    app.add_option("--threads", opts.threads, "parallel grid evaluation (never affects output)")
        ->check(CLI::PositiveNumber);
    app.add_option("--nh", opts.n_h, "harmonic truncation override")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1; // usage error
    }

    const auto& names = transducer::experiment_names();
    if (std::find(names.begin(), names.end(), experiment) == names.end()) {
        std::cerr << "unknown experiment '" << experiment << "'; expected one of: "
                  << experiments_help << "\n";
        return 1;
    }

    try {
        return transducer::run_experiment(experiment, opts, std::cout);
    } catch (const transducer::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const transducer::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
