#pragma once

#include <optional>
#include <vector>

#include "ssid/integrator.hpp"
#include "ssid/matrix.hpp"

namespace ssid {

/// One sampled trajectory: states on a uniform grid, optionally with input
/// samples and exact state derivatives at the same nodes.
struct Trajectory {
    TimeGrid grid;
    Matrix states; // n x (steps + 1)
    std::optional<InputSignal> inputs;
    std::optional<Matrix> derivatives; // n x (steps + 1)

    std::size_t state_dim() const { return states.rows(); }
    std::size_t input_dim() const { return inputs ? inputs->input_dim() : 0; }
    void validate() const;
};

struct SnapshotSet {
    std::vector<Trajectory> trajectories;

    std::size_t state_dim() const;
    bool has_inputs() const;
    bool has_derivatives() const;
    std::size_t total_samples() const;
    void validate() const;

    /// All state columns of all trajectories, concatenated.
    Matrix stacked_states() const;
    /// All derivative columns, concatenated; throws if any trajectory lacks them.
    Matrix stacked_derivatives() const;
};

} // namespace ssid
