#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "transducer/config.hpp"

namespace transducer {

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "rates",         "convert",        "bandwidth",
        "sweep-pump",    "sweep-dephasing", "sweep-detuning",
        "entangle",      "sweep-ent-dephasing", "sweep-ent-detuning",
        "validate"};
    return names;
}

struct RunOptions {
    std::string config_path;             // empty -> pure defaults
    std::string out_dir = "out";
    std::vector<std::string> overrides;  // key=value
    int threads = 1;
    int n_h = 0;                         // 0 -> keep config value
};

// Runs one experiment, writing <name>.csv and/or summary.json plus
// manifest.json into out_dir. Returns 0 on success, 4 on validation failure
// (validate experiment); throws ConfigError / SolverError otherwise.
int run_experiment(const std::string& name, const RunOptions& opts, std::ostream& log);

// One pass/fail line per internal consistency check; used by `validate`.
struct CheckResult {
    std::string name;
    bool pass = false;
    std::string details;
};
std::vector<CheckResult> run_validation_suite(const SystemConfig& cfg, int threads);

namespace detail {
std::string csv_number(double v); // scientific, 9 significant digits, locale-free
}

} // namespace transducer
