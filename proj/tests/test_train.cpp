#include <cmath>

#include "doctest.h"
#include "ssid/datagen.hpp"
#include "ssid/linalg.hpp"
#include "ssid/train.hpp"
#include "test_helpers.hpp"

using namespace ssid;
using testing::random_matrix;

namespace {

SnapshotSet lti_data(const LinearModel& model, std::size_t n_traj, double dt, std::size_t steps,
                     std::uint64_t seed, std::uint64_t input_seed = 0) {
    SnapshotSet data;
    Rng rng(seed);
    for (std::size_t k = 0; k < n_traj; ++k) {
        Trajectory t;
        t.grid = TimeGrid{0.0, dt, steps};
        std::vector<double> x0(model.dim());
        for (double& v : x0) v = rng.normal();
        if (model.b) {
            t.inputs = gen_sinusoid_inputs(model.b->cols(), t.grid, input_seed + 100 * k + 1);
            t.states = simulate(model, x0, t.grid, &*t.inputs);
        } else {
            t.states = simulate(model, x0, t.grid);
        }
        data.trajectories.push_back(std::move(t));
    }
    return data;
}

double rel_l2_error(const Matrix& pred, const Matrix& truth) {
    Matrix diff = pred;
    diff -= truth;
    return diff.frobenius_norm() / truth.frobenius_norm();
}

// Central finite differences over every parameter entry; asserts the analytic
// gradient within 1e-5 relative error wherever the magnitude exceeds 1e-8.
void check_gradient(const StableParams& p, const SnapshotSet& data, std::size_t unroll) {
    const ParamGradients g = grad_unrolled(p, data, unroll);
    auto check_block = [&](const Matrix& analytic, const Matrix& values, auto mutate) {
        for (std::size_t i = 0; i < values.rows(); ++i) {
            for (std::size_t j = 0; j < values.cols(); ++j) {
                const double theta = values(i, j);
                const double h = 1e-6 * std::max(1.0, std::abs(theta));
                StableParams plus = p, minus = p;
                mutate(plus, i, j, theta + h);
                mutate(minus, i, j, theta - h);
                const double fd =
                    (loss_unrolled(plus, data, unroll) - loss_unrolled(minus, data, unroll)) /
                    (2.0 * h);
                const double an = analytic(i, j);
                if (std::abs(an) > 1e-8) {
                    const double rel = std::abs(fd - an) / std::max(std::abs(an), std::abs(fd));
                    CHECK(rel <= 1e-5);
                }
            }
        }
    };
    check_block(g.jbar, p.jbar,
                [](StableParams& q, std::size_t i, std::size_t j, double v) { q.jbar(i, j) = v; });
    check_block(g.rbar, p.rbar,
                [](StableParams& q, std::size_t i, std::size_t j, double v) { q.rbar(i, j) = v; });
    check_block(g.qbar, p.qbar,
                [](StableParams& q, std::size_t i, std::size_t j, double v) { q.qbar(i, j) = v; });
    if (p.bbar) {
        REQUIRE(g.bbar);
        check_block(*g.bbar, *p.bbar, [](StableParams& q, std::size_t i, std::size_t j, double v) {
            (*q.bbar)(i, j) = v;
        });
    }
}

} // namespace

TEST_SUITE("inference") {

TEST_CASE("cyclic learning rate shape") {
    TrainConfig cfg;
    cfg.updates = 1000;
    cfg.cycle_length = 100;
    CHECK(cyclic_lr(cfg, 0) == doctest::Approx(cfg.lr_min));
    CHECK(cyclic_lr(cfg, 50) == doctest::Approx(cfg.lr_max));
    CHECK(cyclic_lr(cfg, 100) == doctest::Approx(cfg.lr_min));
    CHECK(cyclic_lr(cfg, 25) == doctest::Approx(0.5 * (cfg.lr_min + cfg.lr_max)));
    CHECK(cyclic_lr(cfg, 75) == doctest::Approx(0.5 * (cfg.lr_min + cfg.lr_max)));
    // default cycle is updates / 10
    TrainConfig def;
    def.updates = 20000;
    CHECK(def.effective_cycle() == 2000);
}

TEST_CASE("loss is near zero on self-generated data") {
    const StableParams p = init_params(3, 0, 9, 0.4);
    const LinearModel model = assemble(p);
    const SnapshotSet data = lti_data(model, 2, 0.05, 20, 10);
    double scale = 0.0;
    for (const auto& t : data.trajectories) scale += std::pow(t.states.frobenius_norm(), 2);
    CHECK(loss_unrolled(p, data, 1) <= 1e-20 * scale);
}

TEST_CASE("constant data under the zero hypothesis has zero loss") {
    StableParams p{Matrix(2, 2), Matrix(2, 2), Matrix::identity(2), std::nullopt};
    SnapshotSet data;
    Trajectory t;
    t.grid = TimeGrid{0.0, 0.1, 1};
    t.states = Matrix(2, 2, 1.0);
    data.trajectories.push_back(t);
    CHECK(loss_unrolled(p, data, 1) == 0.0);
}

TEST_CASE("scalar decay loss equals the RK4 truncation residual") {
    // candidate A = -1 via Jbar = 0, Rbar = 1, Qbar = 1
    StableParams p{Matrix(1, 1), Matrix::from_rows({{1.0}}), Matrix::from_rows({{1.0}}),
                   std::nullopt};
    SnapshotSet data;
    Trajectory t;
    t.grid = TimeGrid{0.0, 0.1, 1};
    t.states = Matrix(1, 2);
    t.states(0, 0) = 1.0;
    t.states(0, 1) = std::exp(-0.1);
    data.trajectories.push_back(t);
    const double expected = std::pow(std::exp(-0.1) - 0.90483750, 2);
    CHECK(loss_unrolled(p, data, 1) == doctest::Approx(expected).epsilon(1e-10));
    CHECK(loss_unrolled(p, data, 1) < 1e-14);
}

TEST_CASE("gradient matches central finite differences") {
    for (std::size_t n : {2u, 3u, 5u}) {
        const LinearModel truth = gen_stable_lti(n, 40 + n, 0.4);
        const SnapshotSet data = lti_data(truth, 1, 0.05, 15, 50 + n);
        const StableParams p = init_params(n, 0, 60 + n, 0.3);
        check_gradient(p, data, 1);
    }
}

TEST_CASE("gradient matches finite differences with inputs and deeper unrolls") {
    const LinearModel truth = gen_stable_lti(3, 71, 0.4, 2);
    const SnapshotSet data = lti_data(truth, 1, 0.05, 12, 72, 73);
    const StableParams p = init_params(3, 2, 74, 0.3);
    check_gradient(p, data, 1);
    check_gradient(p, data, 3);
}

TEST_CASE("gradient is zero where the data is identically zero") {
    const StableParams p = init_params(2, 0, 80, 0.3);
    SnapshotSet data;
    Trajectory t;
    t.grid = TimeGrid{0.0, 0.1, 5};
    t.states = Matrix(2, 6);
    data.trajectories.push_back(t);
    const ParamGradients g = grad_unrolled(p, data, 1);
    CHECK(g.jbar.frobenius_norm() == 0.0);
    CHECK(g.rbar.frobenius_norm() == 0.0);
    CHECK(g.qbar.frobenius_norm() == 0.0);
}

TEST_CASE("loss is invariant under symmetric shifts of Jbar") {
    const StableParams p = init_params(4, 0, 90, 0.3);
    const LinearModel truth = gen_stable_lti(4, 91, 0.4);
    const SnapshotSet data = lti_data(truth, 1, 0.05, 10, 92);
    const double base = loss_unrolled(p, data, 1);

    Matrix s = random_matrix(4, 4, 93);
    s += s.transpose(); // symmetric
    StableParams shifted = p;
    shifted.jbar += s;
    const double shifted_loss = loss_unrolled(shifted, data, 1);
    CHECK(std::abs(shifted_loss - base) <= 1e-12 * (1.0 + base));
}

TEST_CASE("unroll depth one equals the sum of independent pairwise losses") {
    const StableParams p = init_params(3, 0, 100, 0.3);
    const LinearModel model = assemble(p);
    const LinearModel truth = gen_stable_lti(3, 101, 0.4);
    const SnapshotSet data = lti_data(truth, 2, 0.04, 9, 102);

    double direct = 0.0;
    for (const auto& t : data.trajectories) {
        for (std::size_t i = 0; i + 1 < t.states.cols(); ++i) {
            const auto pred = rk4_step(model.a, t.states.col(i), t.grid.dt);
            const auto obs = t.states.col(i + 1);
            for (std::size_t d = 0; d < 3; ++d) direct += std::pow(pred[d] - obs[d], 2);
        }
    }
    CHECK(loss_unrolled(p, data, 1) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("deeper unrolls match a direct per-window rollout") {
    const StableParams p = init_params(2, 1, 110, 0.3);
    const LinearModel model = assemble(p);
    const LinearModel truth = gen_stable_lti(2, 111, 0.4, 1);
    const SnapshotSet data = lti_data(truth, 1, 0.05, 8, 112, 113);
    const std::size_t unroll = 3;

    double direct = 0.0;
    const Trajectory& t = data.trajectories[0];
    for (std::size_t i = 0; i + unroll < t.states.cols(); ++i) {
        std::vector<double> x = t.states.col(i);
        for (std::size_t j = 1; j <= unroll; ++j) {
            const std::size_t step = i + j - 1;
            x = rk4_step_controlled(model.a, *model.b, x, t.inputs->at(step),
                                    t.inputs->midpoint(step), t.inputs->at(step + 1), t.grid.dt);
            const auto obs = t.states.col(i + j);
            for (std::size_t d = 0; d < x.size(); ++d) direct += std::pow(x[d] - obs[d], 2);
        }
    }
    CHECK(loss_unrolled(p, data, unroll) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("missing Bbar with input data is a configuration error") {
    const LinearModel truth = gen_stable_lti(2, 120, 0.4, 1);
    const SnapshotSet data = lti_data(truth, 1, 0.05, 5, 121, 122);
    const StableParams p = init_params(2, 0, 123, 0.3);
    CHECK_THROWS_AS(loss_unrolled(p, data, 1), ConfigError);
}

TEST_CASE("slsi recovers a known stable 2x2 system") {
    const Matrix a_true = Matrix::from_rows({{0.0, 1.0}, {-1.0, -0.5}});
    const LinearModel truth{a_true, std::nullopt, Provenance::Unconstrained};
    const SnapshotSet data = lti_data(truth, 3, 0.01, 500, 130);

    TrainConfig cfg;
    cfg.updates = 4000;
    cfg.seed = 3;
    const SlsiResult res = train_slsi(data, 2, cfg);

    CHECK(testing::rel_diff(res.model.a, a_true) < 5e-2);
    CHECK(eigenvalues(res.model.a).max_real() <= 1e-8);

    // reprediction on a held-out initial condition
    const SnapshotSet held = lti_data(truth, 1, 0.01, 500, 999);
    const Matrix pred = simulate(res.model, held.trajectories[0].states.col(0),
                                 held.trajectories[0].grid);
    CHECK(rel_l2_error(pred, held.trajectories[0].states) < 1e-2);

    // best-so-far loss is the minimum of the history
    double lowest = res.report.losses[0];
    for (double v : res.report.losses) lowest = std::min(lowest, v);
    CHECK(res.report.final_loss <= lowest);
}

TEST_CASE("training is deterministic under a fixed seed") {
    const LinearModel truth = gen_stable_lti(2, 140, 0.4);
    const SnapshotSet data = lti_data(truth, 2, 0.02, 50, 141);
    TrainConfig cfg;
    cfg.updates = 200;
    cfg.seed = 7;
    const SlsiResult r1 = train_slsi(data, 2, cfg);
    const SlsiResult r2 = train_slsi(data, 2, cfg);
    CHECK(r1.model.a == r2.model.a);
    CHECK(r1.params.jbar == r2.params.jbar);
    const LsiResult l1 = train_lsi(data, 2, cfg);
    const LsiResult l2 = train_lsi(data, 2, cfg);
    CHECK(l1.model.a == l2.model.a);
}

TEST_CASE("slsi stays stable during training") {
    const LinearModel truth = gen_stable_lti(3, 150, 0.4);
    const SnapshotSet data = lti_data(truth, 2, 0.02, 80, 151);
    TrainConfig cfg;
    cfg.updates = 1500;
    cfg.seed = 11;
    std::size_t monitored = 0;
    const SlsiResult res = train_slsi(
        data, 3, cfg,
        [&](std::size_t, const LinearModel& current) {
            ++monitored;
            CHECK(eigenvalues(current.a).max_real() <= 1e-8);
        },
        500);
    CHECK(monitored >= 3);
    CHECK(eigenvalues(res.model.a).max_real() <= 1e-8);
}

TEST_CASE("lsi on noisy data still yields an eigenvalue report") {
    const LinearModel truth = gen_stable_lti(3, 160, 0.4);
    SnapshotSet data = lti_data(truth, 2, 0.02, 100, 161);
    data = add_noise(data, 0.01, 162);
    TrainConfig cfg;
    cfg.updates = 300;
    cfg.seed = 5;
    const LsiResult res = train_lsi(data, 3, cfg);
    CHECK(res.model.provenance == Provenance::Unconstrained);
    const Spectrum s = eigenvalues(res.model.a);
    CHECK(s.eigenvalues.size() == 3); // report exists; stability not guaranteed
}

TEST_CASE("clean-data losses of lsi and slsi are comparable") {
    const LinearModel truth = gen_stable_lti(2, 170, 0.5);
    const SnapshotSet data = lti_data(truth, 2, 0.02, 100, 171);
    TrainConfig cfg;
    cfg.updates = 2000;
    cfg.seed = 9;
    const SlsiResult s = train_slsi(data, 2, cfg);
    const LsiResult l = train_lsi(data, 2, cfg);
    CHECK(std::isfinite(s.report.final_loss));
    CHECK(std::isfinite(l.report.final_loss));
    // same order of magnitude on clean data (both fit well)
    CHECK(s.report.final_loss <= 1e4 * std::max(l.report.final_loss, 1e-18));
}

TEST_CASE("non-finite loss aborts with the step index and last-good parameters") {
    SnapshotSet data;
    Trajectory t;
    t.grid = TimeGrid{0.0, 0.1, 3};
    t.states = Matrix(2, 4, 1e160); // squared residuals overflow
    data.trajectories.push_back(t);
    TrainConfig cfg;
    cfg.updates = 50;
    cfg.seed = 1;
    const LsiResult res = train_lsi(data, 2, cfg);
    REQUIRE(res.report.aborted_at);
    CHECK(*res.report.aborted_at == 0);
    CHECK(res.model.a.all_finite());
}

TEST_CASE("derivative least squares recovers a consistent system") {
    const Matrix a0 = random_matrix(3, 3, 180);
    const Matrix x = random_matrix(3, 12, 181); // full row rank w.p. 1
    const Matrix xdot = a0 * x;
    const LinearModel model = fit_derivative_ls(x, xdot);
    CHECK(testing::rel_diff(model.a, a0) <= 1e-10);
    CHECK(model.provenance == Provenance::Unconstrained);
}

TEST_CASE("derivative least squares with identity snapshots returns Xdot") {
    const Matrix xdot = random_matrix(4, 4, 190);
    const LinearModel model = fit_derivative_ls(Matrix::identity(4), xdot);
    CHECK(testing::rel_diff(model.a, xdot) <= 1e-12);
}

TEST_CASE("single-column fit gives the minimal-norm rank-1 solution") {
    // x = (1, 2), xdot = (3, 4): A = xdot x^T / ||x||^2
    Matrix x(2, 1), xdot(2, 1);
    x(0, 0) = 1.0;
    x(1, 0) = 2.0;
    xdot(0, 0) = 3.0;
    xdot(1, 0) = 4.0;
    const LinearModel model = fit_derivative_ls(x, xdot);
    CHECK(model.a(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(model.a(0, 1) == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(model.a(1, 0) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(model.a(1, 1) == doctest::Approx(1.6).epsilon(1e-12));
}

TEST_CASE("stable derivative fit drives the residual to zero on consistent data") {
    const LinearModel truth = gen_stable_lti(2, 200, 0.5);
    const Matrix x = random_matrix(2, 30, 201);
    const Matrix xdot = truth.a * x;
    TrainConfig cfg;
    cfg.updates = 20000;
    cfg.seed = 13;
    const SlsiResult res = fit_derivative_stable(x, xdot, cfg);
    Matrix resid = res.model.a * x;
    resid -= xdot;
    CHECK(resid.frobenius_norm() <= 1e-6 * xdot.frobenius_norm());
    CHECK(eigenvalues(res.model.a).max_real() <= 1e-8);
}

TEST_CASE("stable derivative fit with zero targets shrinks A") {
    const Matrix x = random_matrix(3, 20, 210);
    const Matrix xdot(3, 20);
    TrainConfig cfg;
    cfg.updates = 3000;
    cfg.seed = 17;
    const SlsiResult res = fit_derivative_stable(x, xdot, cfg);
    const double initial_loss = res.report.losses.front();
    CHECK(res.report.final_loss <= initial_loss);
    CHECK(res.model.a.frobenius_norm() * x.frobenius_norm() <= initial_loss);
    CHECK(eigenvalues(res.model.a).max_real() <= 1e-8);
}

} // TEST_SUITE
