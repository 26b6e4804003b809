#pragma once

#include <stdexcept>
#include <string>

namespace ssid {

/// Incompatible matrix/vector shapes.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Invalid user-supplied configuration (bad threshold, missing B, ...).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Iterative algorithm failed: non-convergence, divergence, non-finite values.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File format or filesystem failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ssid
