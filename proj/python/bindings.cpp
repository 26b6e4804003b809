// Python bindings for the stablesysid core. NumPy arrays cross the boundary
// by copy; all heavy lifting stays in the C++ library.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>

#include "ssid/datagen.hpp"
#include "ssid/io.hpp"
#include "ssid/linalg.hpp"
#include "ssid/pod.hpp"
#include "ssid/train.hpp"

namespace py = pybind11;
using namespace ssid;

namespace {

using NpArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const NpArray& arr) {
    if (arr.ndim() != 2) throw py::value_error("expected a 2-D float array");
    Matrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
    std::memcpy(m.data(), arr.data(), sizeof(double) * m.size());
    return m;
}

std::optional<Matrix> to_matrix_opt(const std::optional<NpArray>& arr) {
    if (!arr) return std::nullopt;
    return to_matrix(*arr);
}

std::vector<double> to_vector(const NpArray& arr) {
    if (arr.ndim() != 1) throw py::value_error("expected a 1-D float array");
    return {arr.data(), arr.data() + arr.shape(0)};
}

py::array_t<double> to_array(const Matrix& m) {
    py::array_t<double> arr({m.rows(), m.cols()});
    std::memcpy(arr.mutable_data(), m.data(), sizeof(double) * m.size());
    return arr;
}

py::array_t<double> to_array_1d(const std::vector<double>& v) {
    py::array_t<double> arr(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())});
    std::memcpy(arr.mutable_data(), v.data(), sizeof(double) * v.size());
    return arr;
}

py::object to_array_opt(const std::optional<Matrix>& m) {
    if (!m) return py::none();
    return to_array(*m);
}

MidpointRule rule_from_string(const std::string& s) {
    if (s == "linear") return MidpointRule::LinearInterpolation;
    if (s == "zoh") return MidpointRule::ZeroOrderHold;
    throw py::value_error("midpoint rule must be 'linear' or 'zoh'");
}

InputSignal make_inputs(const NpArray& samples, const std::string& midpoint) {
    return InputSignal{to_matrix(samples), rule_from_string(midpoint)};
}

Trajectory make_trajectory(double t0, double dt, const NpArray& states,
                           const std::optional<NpArray>& inputs, const std::string& midpoint,
                           const std::optional<NpArray>& derivatives) {
    Trajectory t;
    t.states = to_matrix(states);
    if (t.states.cols() == 0) throw py::value_error("states must have at least one column");
    t.grid = TimeGrid{t0, dt, t.states.cols() - 1};
    if (inputs) t.inputs = make_inputs(*inputs, midpoint);
    if (derivatives) t.derivatives = to_matrix(*derivatives);
    t.validate();
    return t;
}

PodCriterion make_criterion(const std::optional<std::size_t>& rank,
                            const std::optional<double>& energy) {
    if (rank.has_value() == energy.has_value())
        throw py::value_error("give exactly one of rank= or energy=");
    if (rank) return RankCriterion{*rank};
    return EnergyCriterion{*energy};
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stability-guaranteed inference of continuous-time linear dynamical systems";

    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    // ---- linalg ----
    m.def(
        "svd",
        [](const NpArray& a) {
            const SvdResult f = svd(to_matrix(a));
            return py::make_tuple(to_array(f.u), to_array_1d(f.sigma), to_array(f.vt));
        },
        py::arg("a"), "Thin SVD (u, sigma, vt) via one-sided Jacobi");
    m.def(
        "eigenvalues",
        [](const NpArray& a) {
            const Spectrum s = eigenvalues(to_matrix(a));
            py::array_t<std::complex<double>> out(
                std::vector<py::ssize_t>{static_cast<py::ssize_t>(s.eigenvalues.size())});
            std::memcpy(out.mutable_data(), s.eigenvalues.data(),
                        sizeof(std::complex<double>) * s.eigenvalues.size());
            return out;
        },
        py::arg("a"), "Eigenvalues of a real square matrix (Francis QR)");
    m.def(
        "pseudo_inverse",
        [](const NpArray& a, double rcond) { return to_array(pseudo_inverse(to_matrix(a), rcond)); },
        py::arg("a"), py::arg("rcond") = -1.0, "Moore-Penrose pseudo-inverse via SVD");

    // ---- stable parameterization ----
    py::class_<StableParams>(m, "StableParams")
        .def(py::init([](const NpArray& jbar, const NpArray& rbar, const NpArray& qbar,
                         const std::optional<NpArray>& bbar) {
                 StableParams p{to_matrix(jbar), to_matrix(rbar), to_matrix(qbar),
                                to_matrix_opt(bbar)};
                 p.validate();
                 return p;
             }),
             py::arg("jbar"), py::arg("rbar"), py::arg("qbar"), py::arg("bbar") = py::none())
        .def_property_readonly("jbar", [](const StableParams& p) { return to_array(p.jbar); })
        .def_property_readonly("rbar", [](const StableParams& p) { return to_array(p.rbar); })
        .def_property_readonly("qbar", [](const StableParams& p) { return to_array(p.qbar); })
        .def_property_readonly("bbar", [](const StableParams& p) { return to_array_opt(p.bbar); })
        .def_property_readonly("dim", &StableParams::dim)
        .def("assemble", [](const StableParams& p) { return assemble(p); },
             "Assembled guaranteed-stable model A = (J - R) Q")
        .def("__repr__", [](const StableParams& p) {
            return "<StableParams n=" + std::to_string(p.dim()) +
                   (p.bbar ? " m=" + std::to_string(p.input_dim()) : "") + ">";
        });

    py::class_<LinearModel>(m, "LinearModel")
        .def(py::init([](const NpArray& a, const std::optional<NpArray>& b,
                         const std::string& provenance) {
                 return LinearModel{to_matrix(a), to_matrix_opt(b),
                                    provenance_from_string(provenance)};
             }),
             py::arg("a"), py::arg("b") = py::none(), py::arg("provenance") = "unconstrained")
        .def_property_readonly("a", [](const LinearModel& mo) { return to_array(mo.a); })
        .def_property_readonly("b", [](const LinearModel& mo) { return to_array_opt(mo.b); })
        .def_property_readonly("provenance",
                               [](const LinearModel& mo) { return to_string(mo.provenance); })
        .def_property_readonly("dim", &LinearModel::dim)
        .def("__repr__", [](const LinearModel& mo) {
            return "<LinearModel n=" + std::to_string(mo.dim()) + " " +
                   to_string(mo.provenance) + ">";
        });

    m.def(
        "init_params",
        [](std::size_t n, std::size_t m_in, std::uint64_t seed, double std) {
            return init_params(n, m_in, seed, std);
        },
        py::arg("n"), py::arg("m") = 0, py::arg("seed") = 0, py::arg("std") = 0.1,
        "Seeded Gaussian N(0, std^2) initialization of (Jbar, Rbar, Qbar[, Bbar])");
    m.def(
        "decompose_parts",
        [](const StableParams& p) {
            const StableParts parts = decompose_parts(p);
            return py::make_tuple(to_array(parts.j), to_array(parts.r), to_array(parts.q));
        },
        py::arg("params"), "Skew J, PSD R, PSD Q with (J - R) Q = A");
    m.def(
        "lyapunov_value",
        [](const StableParams& p, const NpArray& x) { return lyapunov_value(p, to_vector(x)); },
        py::arg("params"), py::arg("x"));
    m.def(
        "lyapunov_rate",
        [](const StableParams& p, const NpArray& x) { return lyapunov_rate(p, to_vector(x)); },
        py::arg("params"), py::arg("x"));

    // ---- integrator ----
    m.def(
        "rk4_step",
        [](const NpArray& a, const NpArray& x, double dt) {
            return to_array_1d(rk4_step(to_matrix(a), to_vector(x), dt));
        },
        py::arg("a"), py::arg("x"), py::arg("dt"));
    m.def(
        "rk4_step_controlled",
        [](const NpArray& a, const NpArray& b, const NpArray& x, const NpArray& u_now,
           const NpArray& u_mid, const NpArray& u_next, double dt) {
            return to_array_1d(rk4_step_controlled(to_matrix(a), to_matrix(b), to_vector(x),
                                                    to_vector(u_now), to_vector(u_mid),
                                                    to_vector(u_next), dt));
        },
        py::arg("a"), py::arg("b"), py::arg("x"), py::arg("u_now"), py::arg("u_mid"),
        py::arg("u_next"), py::arg("dt"));
    m.def(
        "simulate",
        [](const LinearModel& model, const NpArray& x0, double t0, double dt, std::size_t steps,
           const std::optional<NpArray>& inputs, const std::string& midpoint) {
            const TimeGrid grid{t0, dt, steps};
            std::optional<InputSignal> u;
            if (inputs) u = make_inputs(*inputs, midpoint);
            return to_array(simulate(model, to_vector(x0), grid, u ? &*u : nullptr));
        },
        py::arg("model"), py::arg("x0"), py::arg("t0"), py::arg("dt"), py::arg("steps"),
        py::arg("inputs") = py::none(), py::arg("midpoint") = "linear",
        "RK4 rollout; returns the n x (steps+1) trajectory");

    // ---- snapshots ----
    py::class_<Trajectory>(m, "Trajectory")
        .def(py::init(&make_trajectory), py::arg("t0"), py::arg("dt"), py::arg("states"),
             py::arg("inputs") = py::none(), py::arg("midpoint") = "linear",
             py::arg("derivatives") = py::none())
        .def_property_readonly("t0", [](const Trajectory& t) { return t.grid.t0; })
        .def_property_readonly("dt", [](const Trajectory& t) { return t.grid.dt; })
        .def_property_readonly("states", [](const Trajectory& t) { return to_array(t.states); })
        .def_property_readonly("inputs",
                               [](const Trajectory& t) {
                                   return t.inputs ? py::object(to_array(t.inputs->samples))
                                                   : py::object(py::none());
                               })
        .def_property_readonly("derivatives",
                               [](const Trajectory& t) { return to_array_opt(t.derivatives); });

    py::class_<SnapshotSet>(m, "SnapshotSet")
        .def(py::init([](const std::vector<Trajectory>& trajectories) {
                 SnapshotSet s{trajectories};
                 s.validate();
                 return s;
             }),
             py::arg("trajectories"))
        .def_property_readonly("trajectories",
                               [](const SnapshotSet& s) { return s.trajectories; })
        .def_property_readonly("state_dim", &SnapshotSet::state_dim)
        .def("stacked_states", [](const SnapshotSet& s) { return to_array(s.stacked_states()); })
        .def("__len__", [](const SnapshotSet& s) { return s.trajectories.size(); });

    // ---- POD ----
    py::class_<PodBasis>(m, "PodBasis")
        .def_property_readonly("ur", [](const PodBasis& b) { return to_array(b.ur); })
        .def_property_readonly("sigma",
[](const PodBasis& b) { return to_array_1d(b.sigma_all); })
        .def_readonly("r", &PodBasis::r)
        .def_readonly("energy_captured", &PodBasis::energy_captured)
        .def_readonly("tail_bound", &PodBasis::tail_bound)
        .def("project",
             [](const PodBasis& b, const NpArray& x) { return to_array(project(b, to_matrix(x))); })
        .def("lift",
             [](const PodBasis& b, const NpArray& xr) { return to_array(lift(b, to_matrix(xr))); })
        .def("project_set",
             [](const PodBasis& b, const SnapshotSet& s) { return project(b, s); });

    m.def(
        "fit_pod",
        [](const py::object& data, const std::optional<std::size_t>& rank,
           const std::optional<double>& energy) {
            const PodCriterion crit = make_criterion(rank, energy);
            if (py::isinstance<SnapshotSet>(data))
                return fit_pod(data.cast<const SnapshotSet&>(), crit);
            return fit_pod(to_matrix(data.cast<NpArray>()), crit);
        },
        py::arg("data"), py::arg("rank") = py::none(), py::arg("energy") = py::none(),
        "POD basis from a SnapshotSet or a 2-D snapshot matrix");

    // ---- training ----
    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init([](std::size_t updates, double lr_min, double lr_max,
                         std::size_t cycle_length, double beta1, double beta2, double eps,
                         double init_std, std::uint64_t seed, std::size_t unroll) {
                 TrainConfig cfg;
                 cfg.updates = updates;
                 cfg.lr_min = lr_min;
                 cfg.lr_max = lr_max;
                 cfg.cycle_length = cycle_length;
                 cfg.adam_beta1 = beta1;
                 cfg.adam_beta2 = beta2;
                 cfg.adam_eps = eps;
                 cfg.init_std = init_std;
                 cfg.seed = seed;
                 cfg.unroll_steps = unroll;
                 cfg.validate();
                 return cfg;
             }),
             py::arg("updates") = 20000, py::arg("lr_min") = 1e-6, py::arg("lr_max") = 1e-2,
             py::arg("cycle_length") = 0, py::arg("beta1") = 0.9, py::arg("beta2") = 0.999,
             py::arg("eps") = 1e-8, py::arg("init_std") = 0.1, py::arg("seed") = 0,
             py::arg("unroll") = 1)
        .def_readwrite("updates", &TrainConfig::updates)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("unroll", &TrainConfig::unroll_steps);

    py::class_<LossReport>(m, "LossReport")
        .def_property_readonly("losses",
[](const LossReport& r) { return to_array_1d(r.losses); })
        .def_readonly("final_loss", &LossReport::final_loss)
        .def_readonly("best_update", &LossReport::best_update)
        .def_readonly("wall_seconds", &LossReport::wall_seconds)
        .def_property_readonly("aborted_at", [](const LossReport& r) {
            return r.aborted_at ? py::object(py::int_(*r.aborted_at)) : py::object(py::none());
        });

    m.def(
        "loss_unrolled",
        [](const StableParams& p, const SnapshotSet& data, std::size_t unroll) {
            return loss_unrolled(p, data, unroll);
        },
        py::arg("params"), py::arg("data"), py::arg("unroll") = 1);
    m.def(
        "grad_unrolled",
        [](const StableParams& p, const SnapshotSet& data, std::size_t unroll) {
            const ParamGradients g = grad_unrolled(p, data, unroll);
            return py::make_tuple(to_array(g.jbar), to_array(g.rbar), to_array(g.qbar),
                                  to_array_opt(g.bbar));
        },
        py::arg("params"), py::arg("data"), py::arg("unroll") = 1);
    m.def(
        "train_slsi",
        [](const SnapshotSet& data, std::size_t n, const TrainConfig& cfg) {
            SlsiResult res = train_slsi(data, n, cfg);
            return py::make_tuple(res.params, res.model, res.report);
        },
        py::arg("data"), py::arg("n"), py::arg("config") = TrainConfig{},
        "Stable linear system inference; returns (params, model, report)");
    m.def(
        "train_lsi",
        [](const SnapshotSet& data, std::size_t n, const TrainConfig& cfg) {
            LsiResult res = train_lsi(data, n, cfg);
            return py::make_tuple(res.model, res.report);
        },
        py::arg("data"), py::arg("n"), py::arg("config") = TrainConfig{},
        "Unconstrained baseline; returns (model, report)");
    m.def(
        "fit_derivative_ls",
        [](const NpArray& x, const NpArray& xdot) {
            return fit_derivative_ls(to_matrix(x), to_matrix(xdot));
        },
        py::arg("x"), py::arg("xdot"), "Least-squares fit A = Xdot pinv(X)");
    m.def(
        "fit_derivative_stable",
        [](const NpArray& x, const NpArray& xdot, const TrainConfig& cfg) {
            SlsiResult res = fit_derivative_stable(to_matrix(x), to_matrix(xdot), cfg);
            return py::make_tuple(res.params, res.model, res.report);
        },
        py::arg("x"), py::arg("xdot"), py::arg("config") = TrainConfig{});

    // ---- data generation ----
    m.def(
        "gen_stable_lti",
        [](std::size_t n, std::uint64_t seed, double margin, std::size_t inputs) {
            return gen_stable_lti(n, seed, margin, inputs);
        },
        py::arg("n"), py::arg("seed") = 0, py::arg("margin") = 0.2, py::arg("inputs") = 0);
    m.def(
        "gen_transport_flow",
        [](std::size_t grid, std::size_t times, double t_end, bool derivatives) {
            TransportFlowSpec spec;
            spec.grid_points_per_axis = grid;
            spec.times = times;
            spec.t_end = t_end;
            spec.with_derivatives = derivatives;
            return gen_transport_flow(spec);
        },
        py::arg("grid") = 200, py::arg("times") = 100, py::arg("t_end") = 5.0,
        py::arg("derivatives") = false);
    m.def(
        "gen_burgers",
        [](std::size_t grid, std::size_t samples, double mu, double horizon,
           const std::optional<std::vector<double>>& frequencies, bool derivatives) {
            BurgersSpec spec;
            spec.grid_points = grid;
            spec.samples = samples;
            spec.viscosity = mu;
            spec.horizon = horizon;
            if (frequencies) spec.frequencies = *frequencies;
            spec.with_derivatives = derivatives;
            return gen_burgers(spec);
        },
        py::arg("grid") = 1000, py::arg("samples") = 500, py::arg("mu") = 0.01,
        py::arg("horizon") = 1.0, py::arg("frequencies") = py::none(),
        py::arg("derivatives") = false);
    m.def(
        "add_noise",
        [](const SnapshotSet& data, double sigma_rel, std::uint64_t seed) {
            return add_noise(data, sigma_rel, seed);
        },
        py::arg("data"), py::arg("sigma_rel"), py::arg("seed") = 0);
    m.def(
        "gen_sinusoid_inputs",
        [](std::size_t m_in, double t0, double dt, std::size_t steps, std::uint64_t seed,
           double amplitude) {
            return to_array(
                gen_sinusoid_inputs(m_in, TimeGrid{t0, dt, steps}, seed, amplitude).samples);
        },
        py::arg("m"), py::arg("t0"), py::arg("dt"), py::arg("steps"), py::arg("seed") = 0,
        py::arg("amplitude") = 1.0);

    // ---- io ----
    py::class_<ModelFile>(m, "ModelFile")
        .def(py::init([](const LinearModel& model, const std::optional<StableParams>& params) {
                 return ModelFile{model, params};
             }),
             py::arg("model"), py::arg("params") = py::none())
        .def_readonly("model", &ModelFile::model)
        .def_property_readonly("params", [](const ModelFile& mf) {
            return mf.params ? py::cast(*mf.params) : py::object(py::none());
        });

    m.def("write_snapshots",
          [](const SnapshotSet& data, const std::string& path) { write_snapshots(data, path); },
          py::arg("data"), py::arg("path"), "'.ssb' extension selects the binary format");
    m.def("read_snapshots",
          [](const std::string& path) { return read_snapshots(path); }, py::arg("path"));
    m.def("write_model",
          [](const ModelFile& mf, const std::string& path) { write_model(mf, path); },
          py::arg("model_file"), py::arg("path"));
    m.def("read_model", [](const std::string& path) { return read_model(path); },
          py::arg("path"));
    m.def("write_basis",
          [](const PodBasis& basis, const std::string& path) { write_basis(basis, path); },
          py::arg("basis"), py::arg("path"));
    m.def("read_basis", [](const std::string& path) { return read_basis(path); },
          py::arg("path"));
}
