"""Covariance-matrix simulator of dissipative optomechanical cavity pairs,
with logarithmic-negativity and Gaussian-discord diagnostics."""

__version__ = "0.1.0"

from .dynamics import (
    IntegratorConfig,
    Trajectory,
    evolve,
    max_measure_over_window,
    steady_state,
)
from .errors import (
    DiscordConvergenceError,
    InfeasibleStateError,
    MultistabilityError,
    NoSteadyStateError,
    NumericalDegeneracyError,
    NumericalError,
    StiffnessError,
    UnphysicalStateError,
    ValidationError,
)
from .gaussian import (
    CovarianceMatrix,
    check_physical,
    gaussian_discord,
    log_negativity,
    mean_occupation,
    partial_transpose,
    ppt_separable,
    reduce_modes,
    rotate_local,
    strip_correlations,
    symplectic_eigenvalues,
    symplectic_form,
    thermal_entropy,
)
from .model import (
    OptomechParams,
    compose_pair,
    diffusion_matrix,
    drift_matrix,
    drive_amplitude,
    stability,
    steady_field,
    thermal_occupation,
)
from .protocol import (
    DemonSpec,
    MechInitSpec,
    OptInitSpec,
    ScenarioConfig,
    SweepResult,
    assemble_initial,
    demon_sample,
    prepare_separable_discorded,
    run_activation,
    scenario_fingerprint,
    squeezing_sweep,
    temperature_sweep,
)

__all__ = [
    "CovarianceMatrix",
    "DemonSpec",
    "DiscordConvergenceError",
    "InfeasibleStateError",
    "IntegratorConfig",
    "MechInitSpec",
    "MultistabilityError",
    "NoSteadyStateError",
    "NumericalDegeneracyError",
    "NumericalError",
    "OptInitSpec",
    "OptomechParams",
    "ScenarioConfig",
    "StiffnessError",
    "SweepResult",
    "Trajectory",
    "UnphysicalStateError",
    "ValidationError",
    "assemble_initial",
    "check_physical",
    "compose_pair",
    "demon_sample",
    "diffusion_matrix",
    "drift_matrix",
    "drive_amplitude",
    "evolve",
    "gaussian_discord",
    "log_negativity",
    "max_measure_over_window",
    "mean_occupation",
    "partial_transpose",
    "ppt_separable",
    "prepare_separable_discorded",
    "reduce_modes",
    "rotate_local",
    "run_activation",
    "scenario_fingerprint",
    "squeezing_sweep",
    "stability",
    "steady_field",
    "steady_state",
    "strip_correlations",
    "symplectic_eigenvalues",
    "symplectic_form",
    "temperature_sweep",
    "thermal_entropy",
    "thermal_occupation",
]
