// stablesysid: learn stable continuous-time linear systems from snapshot data.
//
// Pipeline commands: generate -> compress -> train -> simulate / evaluate /
// spectrum. All outputs are plain files (snapshot sets, models, bases, CSV);
// runs are deterministic under fixed seeds.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssid/datagen.hpp"
#include "ssid/io.hpp"
#include "ssid/linalg.hpp"
#include "ssid/pod.hpp"
#include "ssid/rng.hpp"
#include "ssid/train.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

using namespace ssid;

std::ofstream open_out(const std::string& path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

void print_summary(const SnapshotSet& data) {
    std::cout << "n=" << data.state_dim() << " trajectories=" << data.trajectories.size();
    if (!data.trajectories.empty()) {
        const auto& g = data.trajectories.front().grid;
        std::cout << " N=" << g.steps << " dt=" << format_double(g.dt);
        if (data.has_inputs())
            std::cout << " inputs=" << data.trajectories.front().input_dim();
        if (data.has_derivatives()) std::cout << " derivatives=yes";
    }
    std::cout << "\n";
}

// ---- generate ----

struct GenerateCommon {
    std::string out;
    double noise = 0.0;
    std::uint64_t noise_seed = 0;
    bool derivatives = false;
};

void add_common_generate(CLI::App* cmd, GenerateCommon& c) {
    cmd->add_option("--out", c.out, "Output snapshot file (.ssb selects binary)")->required();
    cmd->add_option("--noise", c.noise, "Relative additive noise level (std / signal RMS)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--noise-seed", c.noise_seed, "Seed for the noise generator");
    cmd->add_flag("--derivatives", c.derivatives, "Also store exact state derivatives");
}

void finish_generate(SnapshotSet data, const GenerateCommon& c) {
    if (c.noise > 0.0) data = add_noise(data, c.noise, c.noise_seed);
    write_snapshots(data, c.out);
    print_summary(data);
    std::cout << "wrote " << c.out << "\n";
}

// ---- spectrum / eigenvalue reports ----

void write_eig_report(const LinearModel& model, const std::string& path) {
    const Spectrum s = eigenvalues(model.a);
    auto out = open_out(path);
    out << "re,im\n";
    for (const auto& ev : s.eigenvalues)
        out << format_double(ev.real()) << "," << format_double(ev.imag()) << "\n";
    out << "# max_re " << format_double(s.max_real()) << "\n";
    std::cout << "max Re(lambda) = " << format_double(s.max_real()) << " (" << path << ")\n";
}

// ---- evaluate helpers ----

struct TrajectoryEval {
    double rel_l2 = 0.0;
    std::optional<std::size_t> diverged_at;
    std::vector<double> abs_step_err;
    std::vector<double> rel_step_err;
};

TrajectoryEval evaluate_trajectory(const LinearModel& model, const Trajectory& t,
                                   const PodBasis* basis) {
    TrajectoryEval ev;
    std::vector<double> x0;
    if (basis) {
        const Matrix x0r = project(*basis, t.states.col_range(0, 1));
        x0 = x0r.col(0);
    } else {
        x0 = t.states.col(0);
    }
    const InputSignal* u = t.inputs ? &*t.inputs : nullptr;
    SimulateResult sim = simulate_checked(model, x0, t.grid, model.b ? u : nullptr);
    ev.diverged_at = sim.diverged_at;
    Matrix pred = basis ? lift(*basis, sim.trajectory) : std::move(sim.trajectory);

    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < t.states.cols(); ++k) {
        double col_num = 0.0, col_den = 0.0;
        const bool have = k < pred.cols();
        for (std::size_t i = 0; i < t.states.rows(); ++i) {
            const double truth = t.states(i, k);
            const double diff = have ? pred(i, k) - truth : 0.0;
            col_num += diff * diff;
            col_den += truth * truth;
        }
        if (!have) col_num = std::numeric_limits<double>::infinity();
        num += col_num;
        den += col_den;
        ev.abs_step_err.push_back(std::sqrt(col_num));
        ev.rel_step_err.push_back(col_den > 0.0 ? std::sqrt(col_num / col_den)
                                                : std::sqrt(col_num));
    }
    ev.rel_l2 = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    return ev;
}

// ---- train config plumbing ----

void add_train_options(CLI::App* cmd, TrainConfig& cfg) {
    cmd->add_option("--updates", cfg.updates, "Number of optimizer updates")
        ->capture_default_str();
    cmd->add_option("--lr-min", cfg.lr_min, "Cyclic learning-rate floor")->capture_default_str();
    cmd->add_option("--lr-max", cfg.lr_max, "Cyclic learning-rate ceiling")
        ->capture_default_str();
    cmd->add_option("--cycle-length", cfg.cycle_length,
                    "Learning-rate cycle length in updates (0 = updates/10)")
        ->capture_default_str();
    cmd->add_option("--beta1", cfg.adam_beta1, "Adam first-moment decay")->capture_default_str();
    cmd->add_option("--beta2", cfg.adam_beta2, "Adam second-moment decay")->capture_default_str();
    cmd->add_option("--eps", cfg.adam_eps, "Adam epsilon")->capture_default_str();
    cmd->add_option("--init-std", cfg.init_std, "Std of the Gaussian parameter init")
        ->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "Seed for init (and LSI init)")->capture_default_str();
    cmd->add_option("--unroll", cfg.unroll_steps, "RK4 unroll depth of the loss")
        ->capture_default_str();
}

void write_loss_csv(const TrainConfig& cfg, const LossReport& report, const std::string& path) {
    auto out = open_out(path);
    out << "update,lr,loss\n";
    for (std::size_t i = 0; i < report.losses.size(); ++i)
        out << i << "," << format_double(cyclic_lr(cfg, i)) << ","
            << format_double(report.losses[i]) << "\n";
}

int run_app(int argc, char** argv) {
    CLI::App app{"stablesysid: stability-guaranteed inference of continuous-time linear systems"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key = value config file");
    app.allow_config_extras(false);
    app.get_formatter()->column_width(34);

    // ---------------- generate ----------------
    auto* generate = app.add_subcommand("generate", "Produce snapshot datasets");
    generate->require_subcommand(1);

    auto* gen_tf = generate->add_subcommand("transport-flow",
                                            "Analytic 2-D transporting flow on a square grid");
    TransportFlowSpec tf_spec;
    GenerateCommon tf_common;
    gen_tf->add_option("--grid", tf_spec.grid_points_per_axis, "Grid points per axis")
        ->capture_default_str();
    gen_tf->add_option("--times", tf_spec.times, "Number of time samples")->capture_default_str();
    gen_tf->add_option("--t-end", tf_spec.t_end, "End of the sampling interval")
        ->capture_default_str();
    add_common_generate(gen_tf, tf_common);
    gen_tf->callback([&] {
        tf_spec.with_derivatives = tf_common.derivatives;
        finish_generate(gen_transport_flow(tf_spec), tf_common);
    });

    auto* gen_bu = generate->add_subcommand("burgers", "Viscous Burgers finite-difference data");
    BurgersSpec bu_spec;
    GenerateCommon bu_common;
    std::vector<double> bu_freqs;
    std::string bu_set = "all";
    gen_bu->add_option("--grid", bu_spec.grid_points, "Spatial grid points")
        ->capture_default_str();
    gen_bu->add_option("--samples", bu_spec.samples, "Snapshots per trajectory")
        ->capture_default_str();
    gen_bu->add_option("--mu", bu_spec.viscosity, "Viscosity")->capture_default_str();
    gen_bu->add_option("--horizon", bu_spec.horizon, "Final time")->capture_default_str();
    gen_bu->add_option("--f", bu_freqs, "Initial-condition frequencies (default 1.0..5.0/0.25)");
    gen_bu->add_option("--set", bu_set, "Frequency subset: all, train or test")
        ->check(CLI::IsMember({"all", "train", "test"}))
        ->capture_default_str();
    add_common_generate(gen_bu, bu_common);
    gen_bu->callback([&] {
        bu_spec.with_derivatives = bu_common.derivatives;
        if (!bu_freqs.empty()) bu_spec.frequencies = bu_freqs;
        if (bu_set != "all") {
            const auto test = BurgersSpec::test_frequencies();
            std::vector<double> keep;
            for (double f : bu_spec.frequencies) {
                const bool is_test =
                    std::any_of(test.begin(), test.end(),
                                [f](double t) { return std::abs(t - f) < 1e-12; });
                if (is_test == (bu_set == "test")) keep.push_back(f);
            }
            bu_spec.frequencies = keep;
        }
        finish_generate(gen_burgers(bu_spec), bu_common);
    });

    auto* gen_lti = generate->add_subcommand(
        "lti", "Trajectories of a seeded random stable LTI system");
    GenerateCommon lti_common;
    std::size_t lti_n = 4, lti_traj = 3, lti_steps = 500, lti_inputs = 0;
    std::uint64_t lti_seed = 0, lti_input_seed = 1;
    double lti_margin = 0.2, lti_dt = 0.01;
    std::string lti_model_out;
    gen_lti->add_option("--n", lti_n, "State dimension")->capture_default_str();
    gen_lti->add_option("--seed", lti_seed, "System + initial-condition seed")
        ->capture_default_str();
    gen_lti->add_option("--margin", lti_margin, "Spectral margin (min eig of R)")
        ->capture_default_str();
    gen_lti->add_option("--inputs", lti_inputs, "Input channels (0 = autonomous)")
        ->capture_default_str();
    gen_lti->add_option("--input-seed", lti_input_seed, "Seed for the sinusoidal inputs")
        ->capture_default_str();
    gen_lti->add_option("--traj", lti_traj, "Number of trajectories")->capture_default_str();
    gen_lti->add_option("--dt", lti_dt, "Sample spacing")->capture_default_str();
    gen_lti->add_option("--steps", lti_steps, "Steps per trajectory")->capture_default_str();
    gen_lti->add_option("--model-out", lti_model_out, "Also write the ground-truth model");
    add_common_generate(gen_lti, lti_common);
    gen_lti->callback([&] {
        const LinearModel truth = gen_stable_lti(lti_n, lti_seed, lti_margin, lti_inputs);
        SnapshotSet data;
        Rng rng(lti_seed ^ 0x9e3779b97f4a7c15ull);
        for (std::size_t k = 0; k < lti_traj; ++k) {
            Trajectory t;
            t.grid = TimeGrid{0.0, lti_dt, lti_steps};
            std::vector<double> x0(lti_n);
            for (double& v : x0) v = rng.normal();
            if (truth.b) {
                t.inputs = gen_sinusoid_inputs(lti_inputs, t.grid, lti_input_seed + 1000 * k);
                t.states = simulate(truth, x0, t.grid, &*t.inputs);
            } else {
                t.states = simulate(truth, x0, t.grid);
            }
            if (lti_common.derivatives) {
                Matrix xd = truth.a * t.states;
                if (truth.b) add_mul(xd, 1.0, *truth.b, t.inputs->samples);
                t.derivatives = std::move(xd);
            }
            data.trajectories.push_back(std::move(t));
        }
        if (!lti_model_out.empty()) {
            // file provenance "stable-parameterized" is reserved for models whose
            // raw factors are stored; the fixture ships as a plain matrix
            ModelFile truth_file{truth, std::nullopt};
            truth_file.model.provenance = Provenance::Unconstrained;
            write_model(truth_file, lti_model_out);
        }
        finish_generate(std::move(data), lti_common);
    });

    // ---------------- compress ----------------
    auto* compress = app.add_subcommand("compress", "POD-project snapshots to low dimension");
    std::string cp_in, cp_out, cp_basis_out;
    std::size_t cp_rank = 0;
    double cp_energy = 0.0;
    compress->add_option("--in", cp_in, "Input snapshot file")->required();
    compress->add_option("--out", cp_out, "Reduced snapshot output")->required();
    compress->add_option("--basis-out", cp_basis_out, "POD basis output")->required();
    auto* rank_opt = compress->add_option("--rank", cp_rank, "Retained mode count");
    auto* energy_opt =
        compress->add_option("--energy", cp_energy, "Energy threshold in (0, 1]");
    rank_opt->excludes(energy_opt);
    compress->callback([&] {
        if ((cp_rank == 0) == (cp_energy == 0.0))
            throw ConfigError("compress: give exactly one of --rank or --energy");
        const SnapshotSet data = read_snapshots(cp_in);
        const PodCriterion crit = cp_rank > 0 ? PodCriterion{RankCriterion{cp_rank}}
                                              : PodCriterion{EnergyCriterion{cp_energy}};
        const PodBasis basis = fit_pod(data, crit);

        double total = 0.0;
        for (double s : basis.sigma_all) total += s * s;
        std::vector<double> tail(basis.sigma_all.size() + 1, 0.0);
        for (std::size_t i = basis.sigma_all.size(); i-- > 0;)
            tail[i] = tail[i + 1] + basis.sigma_all[i];
        std::cout << "i,sigma,cumulative_energy,tail_bound\n";
        double cum = 0.0;
        for (std::size_t i = 0; i < basis.sigma_all.size(); ++i) {
            cum += basis.sigma_all[i] * basis.sigma_all[i];
            std::cout << (i + 1) << "," << format_double(basis.sigma_all[i]) << ","
                      << format_double(total > 0 ? cum / total : 1.0) << ","
                      << format_double(tail[i + 1]) << "\n";
        }
        std::cout << "selected r=" << basis.r
                  << " energy=" << format_double(basis.energy_captured)
                  << " tail_bound=" << format_double(basis.tail_bound) << "\n";

        write_basis(basis, cp_basis_out);
        write_snapshots(project(basis, data), cp_out);
        std::cout << "wrote " << cp_basis_out << " and " << cp_out << "\n";
    });

    // ---------------- train ----------------
    auto* train = app.add_subcommand("train", "Fit a linear model to snapshot data");
    std::string tr_in, tr_out, tr_method = "slsi", tr_loss_csv, tr_eig_csv;
    TrainConfig tr_cfg;
    train->add_option("--in", tr_in, "Training snapshot file")->required();
    train->add_option("--out", tr_out, "Model output file")->required();
    train->add_option("--method", tr_method, "slsi, lsi, deriv-ls or deriv-stable")
        ->check(CLI::IsMember({"slsi", "lsi", "deriv-ls", "deriv-stable"}))
        ->capture_default_str();
    train->add_option("--loss-csv", tr_loss_csv, "Loss history CSV (default <out>.loss.csv)");
    train->add_option("--eig-report", tr_eig_csv,
                      "Eigenvalue report CSV (default <out>.eig.csv)");
    add_train_options(train, tr_cfg);
    train->callback([&] {
        const SnapshotSet data = read_snapshots(tr_in);
        const std::size_t n = data.state_dim();
        if (tr_loss_csv.empty()) tr_loss_csv = tr_out + ".loss.csv";
        if (tr_eig_csv.empty()) tr_eig_csv = tr_out + ".eig.csv";

        ModelFile mf;
        std::optional<LossReport> report;
        if (tr_method == "slsi") {
            SlsiResult res = train_slsi(data, n, tr_cfg);
            mf = ModelFile{std::move(res.model), std::move(res.params)};
            report = std::move(res.report);
        } else if (tr_method == "lsi") {
            LsiResult res = train_lsi(data, n, tr_cfg);
            mf = ModelFile{std::move(res.model), std::nullopt};
            report = std::move(res.report);
        } else if (tr_method == "deriv-ls") {
            if (!data.has_derivatives())
                throw ConfigError(
                    "train --method deriv-ls requires derivative snapshots "
                    "(generate with --derivatives)");
            mf = ModelFile{fit_derivative_ls(data.stacked_states(), data.stacked_derivatives()),
                           std::nullopt};
        } else { // deriv-stable
            if (!data.has_derivatives())
                throw ConfigError(
                    "train --method deriv-stable requires derivative snapshots "
                    "(generate with --derivatives)");
            SlsiResult res =
                fit_derivative_stable(data.stacked_states(), data.stacked_derivatives(), tr_cfg);
            mf = ModelFile{std::move(res.model), std::move(res.params)};
            report = std::move(res.report);
        }

        write_model(mf, tr_out);
        write_eig_report(mf.model, tr_eig_csv);
        if (report) {
            write_loss_csv(tr_cfg, *report, tr_loss_csv);
            std::cout << "final loss " << format_double(report->final_loss) << " (best update "
                      << report->best_update << ", "
                      << format_double(report->wall_seconds) << "s)\n";
            if (report->aborted_at) {
                std::cout << "warning: non-finite loss at update " << *report->aborted_at
                          << "; wrote the best finite iterate\n";
                throw NumericalError("training aborted: non-finite loss at update " +
                                     std::to_string(*report->aborted_at));
            }
        }
        std::cout << "wrote " << tr_out << "\n";
    });

    // ---------------- simulate ----------------
    auto* simulate_cmd = app.add_subcommand("simulate", "Integrate a model over a grid");
    std::string sm_model, sm_out, sm_basis, sm_x0_from, sm_inputs_from;
    std::vector<double> sm_x0;
    bool sm_x0_zero = false;
    double sm_dt = 0.01, sm_t0 = 0.0;
    std::size_t sm_steps = 100, sm_x0_traj = 0, sm_x0_col = 0, sm_inputs_traj = 0;
    simulate_cmd->add_option("--model", sm_model, "Model file")->required();
    simulate_cmd->add_option("--out", sm_out, "Output trajectory snapshot file")->required();
    simulate_cmd->add_option("--dt", sm_dt, "Step size")->capture_default_str();
    simulate_cmd->add_option("--t0", sm_t0, "Start time")->capture_default_str();
    simulate_cmd->add_option("--steps", sm_steps, "Number of steps")->capture_default_str();
    simulate_cmd->add_option("--basis", sm_basis,
                             "POD basis: project full-space x0, lift the result");
    auto* x0_opt = simulate_cmd->add_option("--x0", sm_x0, "Initial state values");
    auto* x0_from_opt =
        simulate_cmd->add_option("--x0-from", sm_x0_from, "Snapshot file supplying x0");
    auto* x0_zero_opt =
        simulate_cmd->add_flag("--x0-zero", sm_x0_zero, "Start from the zero state");
    simulate_cmd->add_option("--x0-traj", sm_x0_traj, "Trajectory index for --x0-from")
        ->capture_default_str();
    simulate_cmd->add_option("--x0-col", sm_x0_col, "Sample index for --x0-from")
        ->capture_default_str();
    simulate_cmd->add_option("--inputs-from", sm_inputs_from,
                             "Snapshot file supplying the input signal");
    simulate_cmd->add_option("--inputs-traj", sm_inputs_traj,
                             "Trajectory index for --inputs-from")
        ->capture_default_str();
    x0_opt->excludes(x0_from_opt)->excludes(x0_zero_opt);
    x0_from_opt->excludes(x0_zero_opt);
    simulate_cmd->callback([&] {
        const ModelFile mf = read_model(sm_model);
        std::optional<PodBasis> basis;
        if (!sm_basis.empty()) basis = read_basis(sm_basis);

        std::vector<double> x0;
        if (sm_x0_zero) {
            x0.assign(basis ? basis->full_dim() : mf.model.dim(), 0.0);
        } else if (!sm_x0_from.empty()) {
            const SnapshotSet src = read_snapshots(sm_x0_from);
            if (sm_x0_traj >= src.trajectories.size())
                throw ConfigError("simulate: --x0-traj out of range");
            const Matrix& states = src.trajectories[sm_x0_traj].states;
            if (sm_x0_col >= states.cols())
                throw ConfigError("simulate: --x0-col out of range");
            x0 = states.col(sm_x0_col);
        } else if (!sm_x0.empty()) {
            x0 = sm_x0;
        } else {
            throw ConfigError("simulate: give one of --x0, --x0-from or --x0-zero");
        }

        if (basis) {
            if (x0.size() != basis->full_dim())
                throw DimensionError("simulate: x0 does not match the basis dimension");
            Matrix col(x0.size(), 1);
            col.set_col(0, x0);
            x0 = project(*basis, col).col(0);
        }

        const TimeGrid grid{sm_t0, sm_dt, sm_steps};
        std::optional<InputSignal> inputs;
        if (!sm_inputs_from.empty()) {
            const SnapshotSet src = read_snapshots(sm_inputs_from);
            if (sm_inputs_traj >= src.trajectories.size())
                throw ConfigError("simulate: --inputs-traj out of range");
            if (!src.trajectories[sm_inputs_traj].inputs)
                throw ConfigError("simulate: the selected trajectory carries no inputs");
            inputs = *src.trajectories[sm_inputs_traj].inputs;
            if (inputs->samples.cols() < grid.samples())
                throw DimensionError("simulate: input signal shorter than the grid");
            inputs->samples = inputs->samples.col_range(0, grid.samples());
        }

        const SimulateResult res =
            simulate_checked(mf.model, x0, grid, inputs ? &*inputs : nullptr);

        Trajectory t;
        t.grid = grid;
        t.grid.steps = res.trajectory.cols() - 1;
        t.states = basis ? lift(*basis, res.trajectory) : res.trajectory;
        if (inputs && !res.diverged_at) t.inputs = inputs;
        SnapshotSet out_set;
        out_set.trajectories.push_back(std::move(t));
        write_snapshots(out_set, sm_out);
        std::cout << "trajectory shape (" << out_set.trajectories[0].states.rows() << ", "
                  << out_set.trajectories[0].states.cols() << ")\n";
        if (res.diverged_at) {
            std::cout << "warning: diverged at step " << *res.diverged_at
                      << "; wrote the finite prefix\n";
            throw NumericalError("simulate: trajectory diverged at step " +
                                 std::to_string(*res.diverged_at));
        }
        std::cout << "wrote " << sm_out << "\n";
    });

    // ---------------- evaluate ----------------
    auto* evaluate = app.add_subcommand("evaluate", "Reprediction error on test data");
    std::string ev_model, ev_test, ev_basis, ev_out, ev_steps_out;
    evaluate->add_option("--model", ev_model, "Model file")->required();
    evaluate->add_option("--test", ev_test, "Test snapshot file")->required();
    evaluate->add_option("--basis", ev_basis, "POD basis for full-space comparison");
    evaluate->add_option("--out", ev_out, "Metrics CSV output")->required();
    evaluate->add_option("--per-step", ev_steps_out,
                         "Per-time-step error series CSV (default <out>.steps.csv)");
    evaluate->callback([&] {
        const ModelFile mf = read_model(ev_model);
        const SnapshotSet test = read_snapshots(ev_test);
        std::optional<PodBasis> basis;
        if (!ev_basis.empty()) basis = read_basis(ev_basis);
        if (ev_steps_out.empty()) ev_steps_out = ev_out + ".steps.csv";

        auto metrics = open_out(ev_out);
        auto steps = open_out(ev_steps_out);
        metrics << "trajectory,rel_l2_error,diverged_at\n";
        steps << "trajectory,step,t,abs_error,rel_error\n";
        bool any_diverged = false;
        for (std::size_t k = 0; k < test.trajectories.size(); ++k) {
            const Trajectory& t = test.trajectories[k];
            const TrajectoryEval ev = evaluate_trajectory(mf.model, t, basis ? &*basis : nullptr);
            metrics << k << "," << format_double(ev.rel_l2) << ",";
            if (ev.diverged_at) {
                metrics << *ev.diverged_at;
                any_diverged = true;
            }
            metrics << "\n";
            for (std::size_t s = 0; s < ev.abs_step_err.size(); ++s)
                steps << k << "," << s << ","
                      << format_double(t.grid.t0 + t.grid.dt * static_cast<double>(s)) << ","
                      << format_double(ev.abs_step_err[s]) << ","
                      << format_double(ev.rel_step_err[s]) << "\n";
            std::cout << "trajectory " << k << ": rel_l2_error = " << format_double(ev.rel_l2);
            if (ev.diverged_at) std::cout << " (diverged at step " << *ev.diverged_at << ")";
            std::cout << "\n";
        }
        if (any_diverged) std::cout << "warning: some trajectories diverged\n";
        std::cout << "wrote " << ev_out << " and " << ev_steps_out << "\n";
    });

    // ---------------- spectrum ----------------
    auto* spectrum = app.add_subcommand("spectrum", "Eigenvalue CSV for one or more models");
    std::vector<std::string> sp_models;
    std::string sp_out;
    double sp_zoom = 1.0;
    spectrum->add_option("models", sp_models, "Model files")->required()->expected(-1);
    spectrum->add_option("--out", sp_out, "Output CSV")->required();
    spectrum->add_option("--zoom", sp_zoom,
                         "Half-width of the zoom window annotation around the origin")
        ->capture_default_str();
    spectrum->callback([&] {
        auto out = open_out(sp_out);
        out << "model,re,im,in_zoom\n";
        for (const auto& path : sp_models) {
            const ModelFile mf = read_model(path);
            const Spectrum s = eigenvalues(mf.model.a);
            const std::string name = std::filesystem::path(path).stem().string();
            for (const auto& ev : s.eigenvalues) {
                const bool in_zoom =
                    std::abs(ev.real()) <= sp_zoom && std::abs(ev.imag()) <= sp_zoom;
                out << name << "," << format_double(ev.real()) << ","
                    << format_double(ev.imag()) << "," << (in_zoom ? 1 : 0) << "\n";
            }
            std::cout << name << ": max Re(lambda) = " << format_double(s.max_real()) << "\n";
        }
        std::cout << "wrote " << sp_out << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_app(argc, argv);
    } catch (const ssid::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ssid::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const ssid::DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const ssid::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
