#pragma once

#include <stdexcept>
#include <string>

namespace transducer {

// Invalid or out-of-range physical parameters / config input.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (singular system, non-convergence, failed invariant).
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// The time-domain oracle did not reach a periodic steady state within its horizon.
struct OracleTimeout : SolverError {
    explicit OracleTimeout(const std::string& msg) : SolverError(msg) {}
};

} // namespace transducer
