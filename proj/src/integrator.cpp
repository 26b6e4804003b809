#include "ssid/integrator.hpp"

#include <cmath>
#include <string>

namespace ssid {

void TimeGrid::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(t0))
        throw ConfigError("TimeGrid: dt must be positive and finite");
}

std::vector<double> InputSignal::midpoint(std::size_t k) const {
    const std::size_t m = samples.rows();
    std::vector<double> u(m);
    if (midpoint_rule == MidpointRule::ZeroOrderHold || k + 1 >= samples.cols()) {
        for (std::size_t i = 0; i < m; ++i) u[i] = samples(i, k);
    } else {
        for (std::size_t i = 0; i < m; ++i) u[i] = 0.5 * (samples(i, k) + samples(i, k + 1));
    }
    return u;
}

namespace {

void check_square_match(const Matrix& a, std::size_t xdim, const char* what) {
    if (a.rows() != a.cols()) throw DimensionError(std::string(what) + ": A must be square");
    if (a.rows() != xdim) throw DimensionError(std::string(what) + ": state dimension mismatch");
}

} // namespace

std::vector<double> rk4_step(const Matrix& a, std::span<const double> x, double dt) {
    check_square_match(a, x.size(), "rk4_step");
    const std::size_t n = x.size();
    std::vector<double> stage(x.begin(), x.end());

    const std::vector<double> h1 = matvec(a, stage);
    for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + 0.5 * dt * h1[i];
    const std::vector<double> h2 = matvec(a, stage);
    for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + 0.5 * dt * h2[i];
    const std::vector<double> h3 = matvec(a, stage);
    for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + dt * h3[i];
    const std::vector<double> h4 = matvec(a, stage);

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i] + dt / 6.0 * (h1[i] + 2.0 * h2[i] + 2.0 * h3[i] + h4[i]);
    return out;
}

std::vector<double> rk4_step_controlled(const Matrix& a, const Matrix& b,
                                        std::span<const double> x, std::span<const double> u_now,
                                        std::span<const double> u_mid,
                                        std::span<const double> u_next, double dt) {
    check_square_match(a, x.size(), "rk4_step_controlled");
    if (b.rows() != a.rows()) throw DimensionError("rk4_step_controlled: B row count mismatch");
    if (u_now.size() != b.cols() || u_mid.size() != b.cols() || u_next.size() != b.cols())
        throw DimensionError("rk4_step_controlled: input dimension mismatch");
    const std::size_t n = x.size();
    std::vector<double> stage(x.begin(), x.end());

    auto drift = [&](const std::vector<double>& s, std::span<const double> u) {
        std::vector<double> h = matvec(a, s);
        const std::vector<double> bu = matvec(b, u);
        for (std::size_t i = 0; i < n; ++i) h[i] += bu[i];
        return h;
    };

    const std::vector<double> h1 = drift(stage, u_now);
    for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + 0.5 * dt * h1[i];
    const std::vector<double> h2 = drift(stage, u_mid);
    for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + 0.5 * dt * h2[i];
    const std::vector<double> h3 = drift(stage, u_mid);
    for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + dt * h3[i];
    const std::vector<double> h4 = drift(stage, u_next);

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i] + dt / 6.0 * (h1[i] + 2.0 * h2[i] + 2.0 * h3[i] + h4[i]);
    return out;
}

SimulateResult simulate_checked(const LinearModel& model, std::span<const double> x0,
                                const TimeGrid& grid, const InputSignal* u) {
    grid.validate();
    if (model.a.rows() != x0.size()) throw DimensionError("simulate: x0 dimension mismatch");
    if (model.b) {
        if (!u) throw ConfigError("simulate: model has an input matrix but no input signal given");
        if (u->samples.rows() != model.b->cols())
            throw DimensionError("simulate: input dimension mismatch");
        if (u->samples.cols() != grid.samples())
            throw DimensionError("simulate: input sample count does not match grid");
    }

    const std::size_t n = x0.size();
    Matrix traj(n, grid.samples());
    std::vector<double> x(x0.begin(), x0.end());
    traj.set_col(0, x);
    for (std::size_t k = 0; k < grid.steps; ++k) {
        if (model.b && u) {
            x = rk4_step_controlled(model.a, *model.b, x, u->at(k), u->midpoint(k), u->at(k + 1),
                                    grid.dt);
        } else {
            x = rk4_step(model.a, x, grid.dt);
        }
        for (double v : x) {
            if (!std::isfinite(v)) return {traj.col_range(0, k + 1), k + 1};
        }
        traj.set_col(k + 1, x);
    }
    return {std::move(traj), std::nullopt};
}

Matrix simulate(const LinearModel& model, std::span<const double> x0, const TimeGrid& grid,
                const InputSignal* u) {
    SimulateResult res = simulate_checked(model, x0, grid, u);
    if (res.diverged_at)
        throw NumericalError("simulate: trajectory diverged at step " +
                             std::to_string(*res.diverged_at));
    return std::move(res.trajectory);
}

} // namespace ssid
