#include "ssid/datagen.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ssid/rng.hpp"

namespace ssid {

void TransportFlowSpec::validate() const {
    if (grid_points_per_axis < 2 || times < 2)
        throw ConfigError("TransportFlowSpec: need at least 2 grid points and 2 time samples");
    if (!(t_end > 0.0)) throw ConfigError("TransportFlowSpec: t_end must be positive");
}

std::vector<double> BurgersSpec::default_frequencies() {
    std::vector<double> f;
    for (int k = 0; k <= 16; ++k) f.push_back(1.0 + 0.25 * k);
    return f;
}

std::vector<double> BurgersSpec::test_frequencies() { return {1.75, 2.75, 3.75}; }

void BurgersSpec::validate() const {
    if (!(viscosity > 0.0)) throw ConfigError("BurgersSpec: viscosity must be positive");
    if (samples < 2) throw ConfigError("BurgersSpec: need at least 2 samples");
    if (grid_points < 3) throw ConfigError("BurgersSpec: need at least 3 grid points");
    if (!(horizon > 0.0)) throw ConfigError("BurgersSpec: horizon must be positive");
    if (frequencies.empty()) throw ConfigError("BurgersSpec: frequency list is empty");
}

LinearModel gen_stable_lti(std::size_t n, std::uint64_t seed, double spectral_margin,
                           std::size_t m_inputs) {
    if (n == 0) throw ConfigError("gen_stable_lti: dimension must be >= 1");
    if (!(spectral_margin > 0.0)) throw ConfigError("gen_stable_lti: margin must be positive");
    Rng rng(seed);
    Matrix j(n, n), r0(n, n), q0(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            j(i, k) = rng.normal(0.0, 1.0);
            r0(i, k) = rng.normal(0.0, 1.0);
            q0(i, k) = rng.normal(0.0, 1.0);
        }
    // J skew, R = R0 R0^T + margin I (PD), Q = Q0 Q0^T / n + I (PD)
    Matrix skew(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) skew(i, k) = 0.5 * (j(i, k) - j(k, i));
    Matrix r = mul_nt(r0, r0);
    r *= 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) r(i, i) += spectral_margin;
    Matrix q = mul_nt(q0, q0);
    q *= 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) q(i, i) += 1.0;

    skew -= r;
    LinearModel model{skew * q, std::nullopt, Provenance::StableParameterized};
    if (m_inputs > 0) {
        Matrix b(n, m_inputs);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < m_inputs; ++k) b(i, k) = rng.normal(0.0, 1.0);
        model.b = std::move(b);
    }
    return model;
}

SnapshotSet gen_transport_flow(const TransportFlowSpec& spec) {
    spec.validate();
    const std::size_t g = spec.grid_points_per_axis;
    const std::size_t nt = spec.times;
    const std::size_t n = 2 * g * g;
    const double dt = spec.t_end / static_cast<double>(nt - 1);

    std::vector<double> coord(g);
    for (std::size_t i = 0; i < g; ++i)
        coord[i] = TransportFlowSpec::domain_min +
                   (TransportFlowSpec::domain_max - TransportFlowSpec::domain_min) *
                       static_cast<double>(i) / static_cast<double>(g - 1);

    Trajectory traj;
    traj.grid = {0.0, dt, nt - 1};
    traj.states = Matrix(n, nt);
    if (spec.with_derivatives) traj.derivatives = Matrix(n, nt);
    for (std::size_t k = 0; k < nt; ++k) {
        const double t = dt * static_cast<double>(k);
        std::size_t idx = 0;
        for (std::size_t iy = 0; iy < g; ++iy) {
            for (std::size_t ix = 0; ix < g; ++ix, ++idx) {
                const double ax = 5.0 * (t - coord[ix]);
                const double ay = 5.0 * (t - coord[iy]);
                traj.states(idx, k) = std::sin(ax) * std::sin(ay);         // u
                traj.states(g * g + idx, k) = std::cos(ax) * std::cos(ay); // v
                if (spec.with_derivatives) {
                    (*traj.derivatives)(idx, k) =
                        5.0 * (std::cos(ax) * std::sin(ay) + std::sin(ax) * std::cos(ay));
                    (*traj.derivatives)(g * g + idx, k) =
                        -5.0 * (std::sin(ax) * std::cos(ay) + std::cos(ax) * std::sin(ay));
                }
            }
        }
    }
    SnapshotSet out;
    out.trajectories.push_back(std::move(traj));
    return out;
}

namespace {

// Semi-discrete Burgers right-hand side: conservative second-order central
// flux for (v^2/2)_z plus central diffusion, mirror ghost cells for the
// homogeneous Neumann boundaries.
void burgers_rhs(const std::vector<double>& v, double mu, double h, std::vector<double>& out) {
    const std::size_t n = v.size();
    auto flux = [](double a, double b) { return 0.25 * (a * a + b * b); };
    auto at = [&](long i) {
        if (i < 0) return v[static_cast<std::size_t>(-i)];
        if (i >= static_cast<long>(n)) return v[2 * n - 2 - static_cast<std::size_t>(i)];
        return v[static_cast<std::size_t>(i)];
    };
    for (std::size_t i = 0; i < n; ++i) {
        const long li = static_cast<long>(i);
        const double vm = at(li - 1), v0 = v[i], vp = at(li + 1);
        const double adv = (flux(v0, vp) - flux(vm, v0)) / h;
        const double diff = mu * (vp - 2.0 * v0 + vm) / (h * h);
        out[i] = diff - adv;
    }
}

void rk4_substep(std::vector<double>& v, double mu, double h, double dt,
                 std::vector<double>& k1, std::vector<double>& k2, std::vector<double>& k3,
                 std::vector<double>& k4, std::vector<double>& tmp) {
    const std::size_t n = v.size();
    burgers_rhs(v, mu, h, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = v[i] + 0.5 * dt * k1[i];
    burgers_rhs(tmp, mu, h, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = v[i] + 0.5 * dt * k2[i];
    burgers_rhs(tmp, mu, h, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = v[i] + dt * k3[i];
    burgers_rhs(tmp, mu, h, k4);
    for (std::size_t i = 0; i < n; ++i)
        v[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

} // namespace

SnapshotSet gen_burgers(const BurgersSpec& spec) {
    spec.validate();
    const std::size_t n = spec.grid_points;
    const double h = 1.0 / static_cast<double>(n - 1);
    const double snap_dt = spec.horizon / static_cast<double>(spec.samples - 1);

    SnapshotSet out;
    for (const double f : spec.frequencies) {
        Trajectory traj;
        traj.grid = {0.0, snap_dt, spec.samples - 1};
        traj.states = Matrix(n, spec.samples);
        if (spec.with_derivatives) traj.derivatives = Matrix(n, spec.samples);

        std::vector<double> v(n), k1(n), k2(n), k3(n), k4(n), tmp(n), rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double z = h * static_cast<double>(i);
            v[i] = 1.0 + std::sin((2.0 * f * z + 1.0) * std::numbers::pi);
        }

        auto record = [&](std::size_t col) {
            for (std::size_t i = 0; i < n; ++i) traj.states(i, col) = v[i];
            if (spec.with_derivatives) {
                burgers_rhs(v, spec.viscosity, h, rhs);
                for (std::size_t i = 0; i < n; ++i) (*traj.derivatives)(i, col) = rhs[i];
            }
        };
        record(0);

        for (std::size_t s = 1; s < spec.samples; ++s) {
            double vmax = 0.0;
            for (double vi : v) vmax = std::max(vmax, std::abs(vi));
            const double dt_adv = 0.5 * h / std::max(vmax, 1e-12);
            const double dt_diff = 0.25 * h * h / spec.viscosity;
            double sub_dt = std::min({dt_adv, dt_diff, snap_dt});
            std::size_t substeps = static_cast<std::size_t>(std::ceil(snap_dt / sub_dt));
            if (substeps > 2'000'000)
                throw NumericalError("gen_burgers: substep refinement cap exceeded (f = " +
                                     std::to_string(f) + ")");
            sub_dt = snap_dt / static_cast<double>(substeps);
            for (std::size_t k = 0; k < substeps; ++k)
                rk4_substep(v, spec.viscosity, h, sub_dt, k1, k2, k3, k4, tmp);
            for (double vi : v)
                if (!std::isfinite(vi))
                    throw NumericalError("gen_burgers: solution diverged at sample " +
                                         std::to_string(s) + " (f = " + std::to_string(f) + ")");
            record(s);
        }
        out.trajectories.push_back(std::move(traj));
    }
    return out;
}

SnapshotSet add_noise(const SnapshotSet& data, double sigma_rel, std::uint64_t seed) {
    if (sigma_rel < 0.0) throw ConfigError("add_noise: sigma_rel must be nonnegative");
    data.validate();
    SnapshotSet out = data;
    if (sigma_rel == 0.0) return out;

    double sumsq = 0.0;
    std::size_t count = 0;
    for (const auto& t : data.trajectories) {
        for (std::size_t k = 0; k < t.states.size(); ++k) {
            const double v = t.states.data()[k];
            sumsq += v * v;
        }
        count += t.states.size();
    }
    const double rms = std::sqrt(sumsq / static_cast<double>(count));
    const double std_abs = sigma_rel * rms;

    Rng rng(seed);
    for (auto& t : out.trajectories)
        for (std::size_t k = 0; k < t.states.size(); ++k)
            t.states.data()[k] += rng.normal(0.0, std_abs);
    return out;
}

InputSignal gen_sinusoid_inputs(std::size_t m, const TimeGrid& grid, std::uint64_t seed,
                                double amplitude) {
    if (m == 0) throw ConfigError("gen_sinusoid_inputs: need at least one channel");
    grid.validate();
    Rng rng(seed);
    std::vector<double> omega(m), phase(m);
    for (std::size_t c = 0; c < m; ++c) {
        omega[c] = rng.uniform(0.5, 2.5);
        phase[c] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    InputSignal sig;
    sig.samples = Matrix(m, grid.samples());
    for (std::size_t k = 0; k < grid.samples(); ++k) {
        const double t = grid.t0 + grid.dt * static_cast<double>(k);
        for (std::size_t c = 0; c < m; ++c)
            sig.samples(c, k) = amplitude * std::sin(omega[c] * t + phase[c]);
    }
    return sig;
}

} // namespace ssid
