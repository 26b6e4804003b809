#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ssid/snapshots.hpp"
#include "ssid/stable_param.hpp"

namespace ssid {

/// Invoked with the current assembled model every monitor_every updates.
using TrainMonitor = std::function<void(std::size_t update, const LinearModel& current)>;

struct TrainConfig {
    std::size_t updates = 20000;
    double lr_min = 1e-6;
    double lr_max = 1e-2;
    std::size_t cycle_length = 0; ///< 0 selects updates / 10
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double init_std = 0.1;
    std::uint64_t seed = 0;
    std::size_t unroll_steps = 1;

    void validate() const;
    std::size_t effective_cycle() const;
};

/// Triangular cyclic schedule: linear ramp lr_min -> lr_max -> lr_min per cycle.
double cyclic_lr(const TrainConfig& cfg, std::size_t update);

struct LossReport {
    std::vector<double> losses; ///< full-batch loss before each update
    double final_loss = 0.0;    ///< loss of the returned (best) parameters
    std::size_t best_update = 0;
    double wall_seconds = 0.0;
    /// Set when a non-finite loss aborted training; the returned parameters
    /// are the best finite iterate seen before that update.
    std::optional<std::size_t> aborted_at;
};

struct ParamGradients {
    Matrix jbar;
    Matrix rbar;
    Matrix qbar;
    std::optional<Matrix> bbar;
};

/// Sum over trajectories and window starts i of the squared mismatch between
/// the RK4 rollout seeded at the observed x(t_i) and the observed chain
/// x(t_{i+1}), ..., x(t_{i+unroll}). unroll = 1 is the plain pairwise loss.
double loss_unrolled(const StableParams& p, const SnapshotSet& data, std::size_t unroll);

/// Exact gradient of loss_unrolled by reverse accumulation through the
/// assembly map and the four RK4 stages.
ParamGradients grad_unrolled(const StableParams& p, const SnapshotSet& data, std::size_t unroll);

/// Same loss/gradient for a free (A, B) hypothesis; used by the LSI baseline.
/// Pass ga (and gb when b is present) to accumulate gradients; returns loss.
double unrolled_loss_grad_model(const Matrix& a, const Matrix* b, const SnapshotSet& data,
                                std::size_t unroll, Matrix* ga, Matrix* gb);

struct SlsiResult {
    StableParams params;
    LinearModel model;
    LossReport report;
};

struct LsiResult {
    LinearModel model;
    LossReport report;
};

/// Stable linear system inference: Adam on the (Jbar, Rbar, Qbar, Bbar)
/// parameterization of the unrolled loss. Stable by construction.
SlsiResult train_slsi(const SnapshotSet& data, std::size_t n, const TrainConfig& cfg,
                      const TrainMonitor& monitor = {}, std::size_t monitor_every = 1000);

/// Unconstrained baseline: same loss, free A (and B).
LsiResult train_lsi(const SnapshotSet& data, std::size_t n, const TrainConfig& cfg,
                    const TrainMonitor& monitor = {}, std::size_t monitor_every = 1000);

/// Minimal-norm least-squares fit of xdot = A x: A = Xdot * pinv(X).
LinearModel fit_derivative_ls(const Matrix& x, const Matrix& xdot);

/// Derivative-form objective ||Xdot - A X||_F^2 minimized over the stable
/// parameterization with the same optimizer.
SlsiResult fit_derivative_stable(const Matrix& x, const Matrix& xdot, const TrainConfig& cfg);

} // namespace ssid
