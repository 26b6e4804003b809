"""Stability-guaranteed inference of continuous-time linear dynamical systems.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its public surface.
"""

from ._core import (  # noqa: F401
    ConfigError,
    DimensionError,
    IoError,
    LinearModel,
    LossReport,
    ModelFile,
    NumericalError,
    PodBasis,
    SnapshotSet,
    StableParams,
    TrainConfig,
    Trajectory,
    add_noise,
    decompose_parts,
    eigenvalues,
    fit_derivative_ls,
    fit_derivative_stable,
    fit_pod,
    gen_burgers,
    gen_sinusoid_inputs,
    gen_stable_lti,
    gen_transport_flow,
    grad_unrolled,
    init_params,
    loss_unrolled,
    lyapunov_rate,
    lyapunov_value,
    pseudo_inverse,
    read_basis,
    read_model,
    read_snapshots,
    rk4_step,
    rk4_step_controlled,
    simulate,
    svd,
    train_lsi,
    train_slsi,
    write_basis,
    write_model,
    write_snapshots,
)

__version__ = "0.1.0"
