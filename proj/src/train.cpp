#include "ssid/train.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "ssid/linalg.hpp"
#include "ssid/rng.hpp"

namespace ssid {

void TrainConfig::validate() const {
    if (!(lr_min > 0.0) || lr_min > lr_max)
        throw ConfigError("TrainConfig: need 0 < lr_min <= lr_max");
    if (unroll_steps == 0) throw ConfigError("TrainConfig: unroll_steps must be >= 1");
    if (updates == 0) throw ConfigError("TrainConfig: updates must be >= 1");
    if (!(init_std > 0.0)) throw ConfigError("TrainConfig: init_std must be positive");
}

std::size_t TrainConfig::effective_cycle() const {
    if (cycle_length > 0) return cycle_length;
    return std::max<std::size_t>(updates / 10, 2);
}

double cyclic_lr(const TrainConfig& cfg, std::size_t update) {
    const std::size_t cycle = cfg.effective_cycle();
    const double half = 0.5 * static_cast<double>(cycle);
    const double pos = static_cast<double>(update % cycle);
    const double frac = pos <= half ? pos / half : (static_cast<double>(cycle) - pos) / half;
    return cfg.lr_min + (cfg.lr_max - cfg.lr_min) * frac;
}

namespace {

// Stage-input slices of the input signal for unroll step j (1-based) over
// windows starting at columns 0..w-1.
struct StageInputs {
    Matrix u_begin;
    Matrix u_mid;
    Matrix u_end;
};

StageInputs slice_inputs(const InputSignal& sig, std::size_t j, std::size_t w) {
    StageInputs s;
    s.u_begin = sig.samples.col_range(j - 1, j - 1 + w);
    s.u_end = sig.samples.col_range(j, j + w);
    if (sig.midpoint_rule == MidpointRule::ZeroOrderHold) {
        s.u_mid = s.u_begin;
    } else {
        s.u_mid = s.u_begin;
        s.u_mid += s.u_end;
        s.u_mid *= 0.5;
    }
    return s;
}

struct StepCache {
    Matrix xin;
    Matrix h1, h2, h3;
    Matrix resid;
    std::optional<StageInputs> u;
};

// Forward + optional reverse sweep of the unrolled RK4 loss over one
// trajectory; gradients accumulate into ga/gb.
double trajectory_loss_grad(const Matrix& a, const Matrix* b, const Trajectory& t,
                            std::size_t unroll, Matrix* ga, Matrix* gb) {
    const std::size_t cols = t.states.cols();
    if (cols < unroll + 1) return 0.0; // no valid window
    const std::size_t w = cols - unroll;
    const double dt = t.grid.dt;
    const bool controlled = t.inputs.has_value();
    if (controlled && b == nullptr)
        throw ConfigError("unrolled loss: trajectory has inputs but no input matrix B given");
    if (controlled && b->cols() != t.inputs->input_dim())
        throw DimensionError("unrolled loss: input dimension does not match B");

    auto drift = [&](const Matrix& s, const Matrix* u) {
        Matrix h = a * s;
        if (controlled && u) add_mul(h, 1.0, *b, *u);
        return h;
    };

    std::vector<StepCache> cache(unroll);
    Matrix xcur = t.states.col_range(0, w);
    double loss = 0.0;
    for (std::size_t j = 1; j <= unroll; ++j) {
        StepCache& c = cache[j - 1];
        if (controlled) c.u = slice_inputs(*t.inputs, j, w);
        c.xin = xcur;

        c.h1 = drift(c.xin, controlled ? &c.u->u_begin : nullptr);
        Matrix s = c.xin;
        axpy_scaled(s, 0.5 * dt, c.h1);
        c.h2 = drift(s, controlled ? &c.u->u_mid : nullptr);
        s = c.xin;
        axpy_scaled(s, 0.5 * dt, c.h2);
        c.h3 = drift(s, controlled ? &c.u->u_mid : nullptr);
        s = c.xin;
        axpy_scaled(s, dt, c.h3);
        const Matrix h4 = drift(s, controlled ? &c.u->u_end : nullptr);

        // x_next = x + dt/6 (h1 + 2 h2 + 2 h3 + h4)
        Matrix xnext = c.xin;
        axpy_scaled(xnext, dt / 6.0, c.h1);
        axpy_scaled(xnext, dt / 3.0, c.h2);
        axpy_scaled(xnext, dt / 3.0, c.h3);
        axpy_scaled(xnext, dt / 6.0, h4);

        c.resid = xnext;
        c.resid -= t.states.col_range(j, j + w);
        const double r = c.resid.frobenius_norm();
        loss += r * r;
        xcur = std::move(xnext);
    }
    if (ga == nullptr) return loss;

    Matrix xbar(a.rows(), w);
    for (std::size_t jj = unroll; jj >= 1; --jj) {
        const StepCache& c = cache[jj - 1];
        // direct residual term plus chain from later steps
        axpy_scaled(xbar, 2.0, c.resid);

        // h4 = A s4 (+ B u_end), s4 = xin + dt h3
        Matrix s = c.xin;
        axpy_scaled(s, dt, c.h3);
        Matrix hbar = xbar;
        hbar *= dt / 6.0;
        add_mul_nt(*ga, 1.0, hbar, s);
        if (controlled && gb) add_mul_nt(*gb, 1.0, hbar, c.u->u_end);
        Matrix sbar_sum = mul_tn(a, hbar);

        // h3 = A s3 (+ B u_mid), s3 = xin + dt/2 h2; s4 feeds dt * h3
        s = c.xin;
        axpy_scaled(s, 0.5 * dt, c.h2);
        hbar = xbar;
        hbar *= dt / 3.0;
        axpy_scaled(hbar, dt, sbar_sum); // sbar_sum currently holds s4bar
        add_mul_nt(*ga, 1.0, hbar, s);
        if (controlled && gb) add_mul_nt(*gb, 1.0, hbar, c.u->u_mid);
        Matrix sbar = mul_tn(a, hbar);
        sbar_sum += sbar; // s4bar + s3bar

        // h2 = A s2 (+ B u_mid), s2 = xin + dt/2 h1; s3 feeds dt/2 * h2
        s = c.xin;
        axpy_scaled(s, 0.5 * dt, c.h1);
        hbar = xbar;
        hbar *= dt / 3.0;
        axpy_scaled(hbar, 0.5 * dt, sbar);
        add_mul_nt(*ga, 1.0, hbar, s);
        if (controlled && gb) add_mul_nt(*gb, 1.0, hbar, c.u->u_mid);
        sbar = mul_tn(a, hbar);
        sbar_sum += sbar;

        // h1 = A xin (+ B u_begin); s2 feeds dt/2 * h1
        hbar = xbar;
        hbar *= dt / 6.0;
        axpy_scaled(hbar, 0.5 * dt, sbar);
        add_mul_nt(*ga, 1.0, hbar, c.xin);
        if (controlled && gb) add_mul_nt(*gb, 1.0, hbar, c.u->u_begin);
        sbar = mul_tn(a, hbar);
        sbar_sum += sbar;

        xbar += sbar_sum;
    }
    return loss;
}

void check_loss_preconditions(const SnapshotSet& data, std::size_t unroll) {
    data.validate();
    if (unroll == 0) throw ConfigError("unrolled loss: unroll depth must be >= 1");
    bool any_window = false;
    for (const auto& t : data.trajectories)
        if (t.states.cols() >= unroll + 1) any_window = true;
    if (!any_window)
        throw ConfigError("unrolled loss: unroll depth exceeds every trajectory length");
}

// Gradients of the assembled A = (Jbar - Jbar^T - Rbar Rbar^T) Qbar Qbar^T
// pulled back onto the raw parameters.
ParamGradients chain_to_params(const StableParams& p, const Matrix& ga,
                               std::optional<Matrix> gb) {
    const std::size_t n = p.dim();
    Matrix wmat = mul_nt(p.rbar, p.rbar);
    wmat *= -1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) wmat(i, j) += p.jbar(i, j) - p.jbar(j, i);
    const Matrix qt = mul_nt(p.qbar, p.qbar);

    const Matrix gw = mul_nt(ga, qt);   // dL/dW, using Q~ = Q~^T
    const Matrix gqt = mul_tn(wmat, ga); // dL/dQ~

    ParamGradients g{Matrix(n, n), Matrix(n, n), Matrix(n, n), std::move(gb)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g.jbar(i, j) = gw(i, j) - gw(j, i);
    Matrix sym(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) sym(i, j) = -(gw(i, j) + gw(j, i));
    g.rbar = sym * p.rbar;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) sym(i, j) = gqt(i, j) + gqt(j, i);
    g.qbar = sym * p.qbar;
    return g;
}

// ---- generic Adam loop over a flat parameter vector ----

struct Objective {
    std::size_t dim;
    // evaluates loss; fills grad (same length) when grad != nullptr
    std::function<double(const std::vector<double>&, std::vector<double>*)> eval;
    // optional inspection hook, called every `inspect_every` updates
    std::function<void(std::size_t, const std::vector<double>&)> inspect;
    std::size_t inspect_every = 0;
};

struct AdamRun {
    std::vector<double> best;
    LossReport report;
};

AdamRun run_adam(std::vector<double> theta, const Objective& obj, const TrainConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    std::vector<double> m(obj.dim, 0.0), v(obj.dim, 0.0), grad(obj.dim, 0.0);
    AdamRun run;
    run.best = theta;
    double best_loss = std::numeric_limits<double>::infinity();
    run.report.losses.reserve(cfg.updates);

    double b1t = 1.0, b2t = 1.0;
    for (std::size_t it = 0; it < cfg.updates; ++it) {
        if (obj.inspect && obj.inspect_every > 0 && it % obj.inspect_every == 0)
            obj.inspect(it, theta);
        const double loss = obj.eval(theta, &grad);
        if (!std::isfinite(loss)) {
            run.report.aborted_at = it;
            break;
        }
        run.report.losses.push_back(loss);
        if (loss < best_loss) {
            best_loss = loss;
            run.best = theta;
            run.report.best_update = it;
        }
        const double lr = cyclic_lr(cfg, it);
        b1t *= cfg.adam_beta1;
        b2t *= cfg.adam_beta2;
        for (std::size_t k = 0; k < obj.dim; ++k) {
            m[k] = cfg.adam_beta1 * m[k] + (1.0 - cfg.adam_beta1) * grad[k];
            v[k] = cfg.adam_beta2 * v[k] + (1.0 - cfg.adam_beta2) * grad[k] * grad[k];
            const double mhat = m[k] / (1.0 - b1t);
            const double vhat = v[k] / (1.0 - b2t);
            theta[k] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
        }
    }
    if (!run.report.aborted_at) {
        if (obj.inspect && obj.inspect_every > 0) obj.inspect(cfg.updates, theta);
        const double final_loss = obj.eval(theta, nullptr);
        if (std::isfinite(final_loss) && final_loss < best_loss) {
            best_loss = final_loss;
            run.best = theta;
            run.report.best_update = cfg.updates;
        }
    }
    run.report.final_loss = best_loss;
    run.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return run;
}

// flat packing helpers
void pack(const Matrix& m, std::vector<double>& out) {
    out.insert(out.end(), m.data(), m.data() + m.size());
}

void unpack(const std::vector<double>& theta, std::size_t& off, Matrix& m) {
    for (std::size_t k = 0; k < m.size(); ++k) m.data()[k] = theta[off + k];
    off += m.size();
}

StableParams unpack_params(const std::vector<double>& theta, std::size_t n, std::size_t m) {
    StableParams p{Matrix(n, n), Matrix(n, n), Matrix(n, n), std::nullopt};
    std::size_t off = 0;
    unpack(theta, off, p.jbar);
    unpack(theta, off, p.rbar);
    unpack(theta, off, p.qbar);
    if (m > 0) {
        p.bbar = Matrix(n, m);
        unpack(theta, off, *p.bbar);
    }
    return p;
}

std::size_t required_input_dim(const SnapshotSet& data) {
    std::size_t m = 0;
    for (const auto& t : data.trajectories) {
        if (!t.inputs) continue;
        if (m == 0) m = t.inputs->input_dim();
        if (t.inputs->input_dim() != m)
            throw DimensionError("training data: trajectories disagree on input dimension");
    }
    return m;
}

} // namespace

double unrolled_loss_grad_model(const Matrix& a, const Matrix* b, const SnapshotSet& data,
                                std::size_t unroll, Matrix* ga, Matrix* gb) {
    check_loss_preconditions(data, unroll);
    if (data.state_dim() != a.rows())
        throw DimensionError("unrolled loss: data state dimension does not match A");
    double loss = 0.0;
    for (const auto& t : data.trajectories)
        loss += trajectory_loss_grad(a, b, t, unroll, ga, gb);
    return loss;
}

double loss_unrolled(const StableParams& p, const SnapshotSet& data, std::size_t unroll) {
    if (data.has_inputs() && !p.bbar)
        throw ConfigError("loss_unrolled: data has inputs but parameters carry no Bbar");
    const LinearModel model = assemble(p);
    return unrolled_loss_grad_model(model.a, model.b ? &*model.b : nullptr, data, unroll, nullptr,
                                    nullptr);
}

ParamGradients grad_unrolled(const StableParams& p, const SnapshotSet& data, std::size_t unroll) {
    if (data.has_inputs() && !p.bbar)
        throw ConfigError("grad_unrolled: data has inputs but parameters carry no Bbar");
    const LinearModel model = assemble(p);
    const std::size_t n = p.dim();
    Matrix ga(n, n);
    std::optional<Matrix> gb;
    if (p.bbar) gb = Matrix(n, p.bbar->cols());
    unrolled_loss_grad_model(model.a, model.b ? &*model.b : nullptr, data, unroll, &ga,
                             gb ? &*gb : nullptr);
    return chain_to_params(p, ga, std::move(gb));
}

SlsiResult train_slsi(const SnapshotSet& data, std::size_t n, const TrainConfig& cfg,
                      const TrainMonitor& monitor, std::size_t monitor_every) {
    cfg.validate();
    data.validate();
    if (data.state_dim() != n)
        throw DimensionError("train_slsi: requested dimension does not match data");
    check_loss_preconditions(data, cfg.unroll_steps);
    const std::size_t m = required_input_dim(data);

    const StableParams p0 = init_params(n, m, cfg.seed, cfg.init_std);
    std::vector<double> theta0;
    pack(p0.jbar, theta0);
    pack(p0.rbar, theta0);
    pack(p0.qbar, theta0);
    if (p0.bbar) pack(*p0.bbar, theta0);

    Objective obj;
    obj.dim = theta0.size();
    obj.eval = [&data, n, m, &cfg](const std::vector<double>& theta, std::vector<double>* grad) {
        const StableParams p = unpack_params(theta, n, m);
        const LinearModel model = assemble(p);
        if (grad == nullptr)
            return unrolled_loss_grad_model(model.a, model.b ? &*model.b : nullptr, data,
                                            cfg.unroll_steps, nullptr, nullptr);
        Matrix ga(n, n);
        std::optional<Matrix> gb;
        if (m > 0) gb = Matrix(n, m);
        const double loss =
            unrolled_loss_grad_model(model.a, model.b ? &*model.b : nullptr, data,
                                     cfg.unroll_steps, &ga, gb ? &*gb : nullptr);
        const ParamGradients pg = chain_to_params(p, ga, std::move(gb));
        grad->clear();
        pack(pg.jbar, *grad);
        pack(pg.rbar, *grad);
        pack(pg.qbar, *grad);
        if (pg.bbar) pack(*pg.bbar, *grad);
        return loss;
    };
    if (monitor) {
        obj.inspect_every = monitor_every;
        obj.inspect = [&monitor, n, m](std::size_t update, const std::vector<double>& theta) {
            monitor(update, assemble(unpack_params(theta, n, m)));
        };
    }

    AdamRun run = run_adam(std::move(theta0), obj, cfg);
    SlsiResult result{unpack_params(run.best, n, m), LinearModel{}, std::move(run.report)};
    result.model = assemble(result.params);
    return result;
}

LsiResult train_lsi(const SnapshotSet& data, std::size_t n, const TrainConfig& cfg,
                    const TrainMonitor& monitor, std::size_t monitor_every) {
    cfg.validate();
    data.validate();
    if (data.state_dim() != n)
        throw DimensionError("train_lsi: requested dimension does not match data");
    check_loss_preconditions(data, cfg.unroll_steps);
    const std::size_t m = required_input_dim(data);

    Rng rng(cfg.seed);
    std::vector<double> theta0(n * n + n * m);
    for (double& v : theta0) v = rng.normal(0.0, cfg.init_std);

    auto unpack_model = [n, m](const std::vector<double>& theta) {
        LinearModel model{Matrix(n, n), std::nullopt, Provenance::Unconstrained};
        std::size_t off = 0;
        unpack(theta, off, model.a);
        if (m > 0) {
            model.b = Matrix(n, m);
            unpack(theta, off, *model.b);
        }
        return model;
    };

    Objective obj;
    obj.dim = theta0.size();
    obj.eval = [&data, &cfg, n, m, &unpack_model](const std::vector<double>& theta,
                                                  std::vector<double>* grad) {
        const LinearModel model = unpack_model(theta);
        if (grad == nullptr)
            return unrolled_loss_grad_model(model.a, model.b ? &*model.b : nullptr, data,
                                            cfg.unroll_steps, nullptr, nullptr);
        Matrix ga(n, n);
        std::optional<Matrix> gb;
        if (m > 0) gb = Matrix(n, m);
        const double loss =
            unrolled_loss_grad_model(model.a, model.b ? &*model.b : nullptr, data,
                                     cfg.unroll_steps, &ga, gb ? &*gb : nullptr);
        grad->clear();
        pack(ga, *grad);
        if (gb) pack(*gb, *grad);
        return loss;
    };
    if (monitor) {
        obj.inspect_every = monitor_every;
        obj.inspect = [&monitor, &unpack_model](std::size_t update,
                                                const std::vector<double>& theta) {
            monitor(update, unpack_model(theta));
        };
    }

    AdamRun run = run_adam(std::move(theta0), obj, cfg);
    return {unpack_model(run.best), std::move(run.report)};
}

LinearModel fit_derivative_ls(const Matrix& x, const Matrix& xdot) {
    require_same_shape(x, xdot, "fit_derivative_ls");
    return {xdot * pseudo_inverse(x), std::nullopt, Provenance::Unconstrained};
}

SlsiResult fit_derivative_stable(const Matrix& x, const Matrix& xdot, const TrainConfig& cfg) {
    cfg.validate();
    require_same_shape(x, xdot, "fit_derivative_stable");
    const std::size_t n = x.rows();

    const StableParams p0 = init_params(n, 0, cfg.seed, cfg.init_std);
    std::vector<double> theta0;
    pack(p0.jbar, theta0);
    pack(p0.rbar, theta0);
    pack(p0.qbar, theta0);

    Objective obj;
    obj.dim = theta0.size();
    obj.eval = [&x, &xdot, n](const std::vector<double>& theta, std::vector<double>* grad) {
        const StableParams p = unpack_params(theta, n, 0);
        const LinearModel model = assemble(p);
        Matrix resid = model.a * x;
        resid -= xdot;
        const double r = resid.frobenius_norm();
        const double loss = r * r;
        if (grad != nullptr) {
            const Matrix ga = mul_nt(resid, x) * 2.0;
            const ParamGradients pg = chain_to_params(p, ga, std::nullopt);
            grad->clear();
            pack(pg.jbar, *grad);
            pack(pg.rbar, *grad);
            pack(pg.qbar, *grad);
        }
        return loss;
    };

    AdamRun run = run_adam(std::move(theta0), obj, cfg);
    SlsiResult result{unpack_params(run.best, n, 0), LinearModel{}, std::move(run.report)};
    result.model = assemble(result.params);
    return result;
}

} // namespace ssid
