#include "ssid/snapshots.hpp"

namespace ssid {

void Trajectory::validate() const {
    grid.validate();
    if (states.cols() != grid.samples())
        throw DimensionError("Trajectory: state column count does not match grid samples");
    if (states.rows() == 0) throw DimensionError("Trajectory: empty state dimension");
    if (inputs && inputs->samples.cols() != grid.samples())
        throw DimensionError("Trajectory: input column count does not match grid samples");
    if (derivatives &&
        (derivatives->rows() != states.rows() || derivatives->cols() != states.cols()))
        throw DimensionError("Trajectory: derivative shape does not match states");
}

std::size_t SnapshotSet::state_dim() const {
    return trajectories.empty() ? 0 : trajectories.front().state_dim();
}

bool SnapshotSet::has_inputs() const {
    for (const auto& t : trajectories)
        if (t.inputs) return true;
    return false;
}

bool SnapshotSet::has_derivatives() const {
    if (trajectories.empty()) return false;
    for (const auto& t : trajectories)
        if (!t.derivatives) return false;
    return true;
}

std::size_t SnapshotSet::total_samples() const {
    std::size_t n = 0;
    for (const auto& t : trajectories) n += t.states.cols();
    return n;
}

void SnapshotSet::validate() const {
    if (trajectories.empty()) throw DimensionError("SnapshotSet: no trajectories");
    const std::size_t n = trajectories.front().state_dim();
    for (const auto& t : trajectories) {
        t.validate();
        if (t.state_dim() != n)
            throw DimensionError("SnapshotSet: trajectories disagree on state dimension");
    }
}

Matrix SnapshotSet::stacked_states() const {
    validate();
    const std::size_t n = state_dim();
    Matrix x(n, total_samples());
    std::size_t off = 0;
    for (const auto& t : trajectories) {
        for (std::size_t j = 0; j < t.states.cols(); ++j)
            for (std::size_t i = 0; i < n; ++i) x(i, off + j) = t.states(i, j);
        off += t.states.cols();
    }
    return x;
}

Matrix SnapshotSet::stacked_derivatives() const {
    validate();
    if (!has_derivatives())
        throw ConfigError("SnapshotSet: derivative snapshots are required but missing");
    const std::size_t n = state_dim();
    Matrix xd(n, total_samples());
    std::size_t off = 0;
    for (const auto& t : trajectories) {
        for (std::size_t j = 0; j < t.derivatives->cols(); ++j)
            for (std::size_t i = 0; i < n; ++i) xd(i, off + j) = (*t.derivatives)(i, j);
        off += t.derivatives->cols();
    }
    return xd;
}

} // namespace ssid
