#pragma once

#include <stdexcept>
#include <string>

namespace tpe {

// Bad run configuration (unknown keys, out-of-range values, unsupported degrees).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error("config: " + msg) {}
};

// Physical/model-level inconsistency (singular change of variables, bad coefficient).
struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& msg) : std::runtime_error("model: " + msg) {}
};

// Linear or nonlinear solve failure.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error("solver: " + msg) {}
};

// Bad user data (non-finite values, malformed files).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error("data: " + msg) {}
};

} // namespace tpe
