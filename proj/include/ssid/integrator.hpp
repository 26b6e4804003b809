#pragma once

#include <span>
#include <vector>

#include "ssid/matrix.hpp"
#include "ssid/stable_param.hpp"

namespace ssid {

/// Uniform time grid: samples t0 + k*dt for k = 0..steps.
struct TimeGrid {
    double t0 = 0.0;
    double dt = 0.0;
    std::size_t steps = 0;

    std::size_t samples() const { return steps + 1; }
    void validate() const;
};

enum class MidpointRule { LinearInterpolation, ZeroOrderHold };

/// Input samples on the grid nodes, one column per node. The midpoint rule
/// selects how u(t + dt/2) is formed for the interior RK4 stages.
struct InputSignal {
    Matrix samples; // m x (steps + 1)
    MidpointRule midpoint_rule = MidpointRule::LinearInterpolation;

    std::size_t input_dim() const { return samples.rows(); }
    std::vector<double> at(std::size_t k) const { return samples.col(k); }
    std::vector<double> midpoint(std::size_t k) const;
};

/// One classical RK4 step of xdot = A x.
std::vector<double> rk4_step(const Matrix& a, std::span<const double> x, double dt);

/// One classical RK4 step of xdot = A x + B u, with the input held at u_now,
/// u_mid, u_mid, u_next across the four stages.
std::vector<double> rk4_step_controlled(const Matrix& a, const Matrix& b,
                                        std::span<const double> x, std::span<const double> u_now,
                                        std::span<const double> u_mid,
                                        std::span<const double> u_next, double dt);

/// Roll the model over the grid. Column 0 is x0; column k+1 is one RK4 step
/// from column k. Throws NumericalError naming the step index if the state
/// leaves the finite range.
Matrix simulate(const LinearModel& model, std::span<const double> x0, const TimeGrid& grid,
                const InputSignal* u = nullptr);

/// Like simulate, but on divergence returns the finite prefix and the failing
/// step index instead of throwing.
struct SimulateResult {
    Matrix trajectory;
    std::optional<std::size_t> diverged_at;
};
SimulateResult simulate_checked(const LinearModel& model, std::span<const double> x0,
                                const TimeGrid& grid, const InputSignal* u = nullptr);

} // namespace ssid
