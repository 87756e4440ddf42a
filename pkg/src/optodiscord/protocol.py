"""Experiment orchestration: state preparation, demon rotations, activation
runs, and parameter sweeps over two independent cavity-mirror units.

The composed system uses the global mode ordering (M1, M2, F1, F2): the
two mirrors form the register, the two cavity fields the ancillas, and the
register-vs-ancilla split is the contiguous mirrors-vs-fields bipartition.
"""

from __future__ import annotations

import hashlib
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, is_dataclass, replace

import numpy as np

from .dynamics import IntegratorConfig, Trajectory, evolve, max_measure_over_window, steady_state
from .errors import InfeasibleStateError, NoSteadyStateError, ValidationError
from .gaussian import (
    CovarianceMatrix,
    _log_negativity_raw,
    _symplectic_eigenvalues_raw,
    gaussian_discord,
    reduce_modes,
    rotate_local,
)
from .model import OptomechParams, compose_pair, diffusion_matrix, drift_matrix, stability, thermal_occupation

MEASURE_NAMES = ("E_pair1", "E_pair2", "E_mirrors_vs_fields", "D_mech", "nu_min")

# global row indices of each unit's (mirror, field) block and of the register
_PAIR1_ROWS = np.array([0, 1, 4, 5])
_PAIR2_ROWS = np.array([2, 3, 6, 7])
_MECH_ROWS = np.array([0, 1, 2, 3])

WORKERS_ENV = "OPTODISCORD_WORKERS"


def worker_count() -> int:
    """Sweep parallelism, controlled by the OPTODISCORD_WORKERS env var."""
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class MechInitSpec:
    """Initial state of the mechanical register.

    kind = "thermal" (at ``temperature``, or each unit's bath temperature
    when None), "file" (two-mode matrix file at ``path``), or
    "separable_discorded" (see :func:`prepare_separable_discorded`).
    """

    kind: str = "thermal"
    temperature: float | None = None
    path: str | None = None
    target_occupation: float | None = None
    correlation_strength: float = 1.0

    def __post_init__(self):
        if self.kind not in ("thermal", "file", "separable_discorded"):
            raise ValidationError(f"unknown mechanical init kind {self.kind!r}")
        if self.kind == "file" and not self.path:
            raise ValidationError("mechanical init from file requires a path")
        if self.kind == "separable_discorded" and self.target_occupation is None:
            raise ValidationError("separable_discorded init requires target_occupation")


@dataclass(frozen=True)
class OptInitSpec:
    """Initial state of each cavity field: coherent (vacuum fluctuations)
    or single-mode squeezed with parameter ``squeezing`` and axis ``phase``."""

    kind: str = "coherent"
    squeezing: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in ("coherent", "squeezed"):
            raise ValidationError(f"unknown optical init kind {self.kind!r}")
        if self.squeezing < 0:
            raise ValidationError("squeezing must be non-negative")


@dataclass(frozen=True)
class DemonSpec:
    """Either fixed local rotation angles for the two mirrors, or a
    sampling specification (count and seed) for randomized rotations."""

    angles: tuple[float, float] | None = None
    samples: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.samples is not None and self.samples < 1:
            raise ValidationError("demon sample count must be >= 1")


@dataclass(frozen=True)
class ScenarioConfig:
    """Declarative description of one experiment."""

    params_pair: tuple[OptomechParams, OptomechParams] = (
        OptomechParams(), OptomechParams())
    mech_init: MechInitSpec = MechInitSpec()
    opt_init: OptInitSpec = OptInitSpec()
    demon: DemonSpec | None = None
    integrator: IntegratorConfig | None = None
    outputs: tuple[str, ...] = MEASURE_NAMES

    def __post_init__(self):
        for name in self.outputs:
            if name not in MEASURE_NAMES:
                raise ValidationError(
                    f"unknown output measure {name!r}; choose from {MEASURE_NAMES}"
                )

    @property
    def window_cap(self) -> float:
        """Upper bound on the dynamical window: ten mechanical lifetimes."""
        return 10.0 / min(p.mech_damping for p in self.params_pair)


@dataclass
class SweepResult:
    """One record per axis point, plus reproducibility metadata."""

    axis_name: str
    axis_values: list
    records: list[dict]
    metadata: dict

    def __post_init__(self):
        if len(self.axis_values) != len(self.records):
            raise ValidationError("one record per axis point required")

    def column(self, key: str) -> np.ndarray:
        return np.array([rec[key] for rec in self.records])


def _canonical(obj) -> str:
    if is_dataclass(obj) and not isinstance(obj, type):
        inner = ",".join(
            f"{f.name}={_canonical(getattr(obj, f.name))}" for f in fields(obj)
        )
        return f"{type(obj).__name__}({inner})"
    if isinstance(obj, (tuple, list)):
        return "[" + ",".join(_canonical(x) for x in obj) + "]"
    if isinstance(obj, float):
        return repr(obj)
    return repr(obj)


def scenario_fingerprint(cfg: ScenarioConfig) -> str:
    """Content digest of a scenario, recorded in output metadata."""
    return hashlib.sha256(_canonical(cfg).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# State preparation
# ---------------------------------------------------------------------------

def prepare_separable_discorded(
    target_occupation: float, correlation_strength: float
) -> CovarianceMatrix:
    """Symmetric squeezed-thermal two-mode state: separable but correlated.

    Both reductions are thermal with mean occupation ``target_occupation``.
    ``correlation_strength`` interpolates the partial-transpose eigenvalue
    linearly between the product state (0) and the separability boundary
    1/2 (at 1), so every output is PPT-separable with zero entanglement,
    and any nonzero strength carries positive discord.
    """
    if target_occupation < 0:
        raise ValidationError("target_occupation must be non-negative")
    if not 0.0 <= correlation_strength <= 1.0:
        raise InfeasibleStateError(
            f"correlation_strength {correlation_strength} infeasible: separability "
            "bounds the maximal feasible strength at 1.0"
        )
    a = target_occupation + 0.5
    c = correlation_strength * target_occupation
    m = a * np.eye(4)
    m[0, 2] = m[2, 0] = c
    m[1, 3] = m[3, 1] = -c
    return CovarianceMatrix(m)


def assemble_initial(mech: CovarianceMatrix, opt_init: OptInitSpec) -> CovarianceMatrix:
    """Four-mode initial state (M1, M2, F1, F2), block-diagonal across the
    mirrors-vs-fields split."""
    if mech.n_modes != 2:
        raise ValidationError("mechanical initial state must have two modes")
    nu0 = _symplectic_eigenvalues_raw(mech.mat)[0]
    if nu0 < 0.5 - 1e-6:
        raise ValidationError("mechanical initial state is unphysical")
    if opt_init.kind == "squeezed":
        optical = CovarianceMatrix.squeezed_vacuum(opt_init.squeezing, opt_init.phase)
    else:
        optical = CovarianceMatrix.vacuum(1)
    return CovarianceMatrix.direct_sum([mech, optical, optical])


def _mech_init_cm(cfg: ScenarioConfig) -> CovarianceMatrix:
    spec = cfg.mech_init
    if spec.kind == "thermal":
        occ = []
        for p in cfg.params_pair:
            temp = spec.temperature if spec.temperature is not None else p.bath_temperature
            occ.append(thermal_occupation(temp, p.mech_frequency))
        return CovarianceMatrix.thermal(occ)
    if spec.kind == "separable_discorded":
        return prepare_separable_discorded(spec.target_occupation, spec.correlation_strength)
    from .io import read_matrix  # deferred: io depends on protocol types
    cm = read_matrix(spec.path)
    if cm.n_modes != 2:
        raise ValidationError(
            f"mechanical init file {spec.path} holds {cm.n_modes} modes, expected 2"
        )
    return cm


def _composed_system(cfg: ScenarioConfig) -> tuple[np.ndarray, np.ndarray]:
    units = [(drift_matrix(p), diffusion_matrix(p)) for p in cfg.params_pair]
    return compose_pair(units[0], units[1])


def _integrator(cfg: ScenarioConfig) -> IntegratorConfig:
    if cfg.integrator is not None:
        return cfg.integrator
    return IntegratorConfig(t_end=cfg.window_cap)


# ---------------------------------------------------------------------------
# Measures along a trajectory
# ---------------------------------------------------------------------------

def _measure_series(traj: Trajectory, names: tuple[str, ...]) -> dict[str, np.ndarray]:
    out = {name: np.empty(len(traj.times)) for name in names}
    for k, state in enumerate(traj.states):
        for name in names:
            if name == "E_pair1":
                sub = state[np.ix_(_PAIR1_ROWS, _PAIR1_ROWS)]
                val = _log_negativity_raw(sub, [2])
            elif name == "E_pair2":
                sub = state[np.ix_(_PAIR2_ROWS, _PAIR2_ROWS)]
                val = _log_negativity_raw(sub, [2])
            elif name == "E_mirrors_vs_fields":
                val = _log_negativity_raw(state, [3, 4])
            elif name == "D_mech":
                sub = state[np.ix_(_MECH_ROWS, _MECH_ROWS)]
                val = gaussian_discord(CovarianceMatrix(sub))
            else:  # nu_min
                val = float(_symplectic_eigenvalues_raw(state)[0])
            out[name][k] = val
    return out


# ---------------------------------------------------------------------------
# Activation runs
# ---------------------------------------------------------------------------

def run_activation(cfg: ScenarioConfig, *, settle: bool = True) -> Trajectory:
    """Evolve the composed pair from the configured initial state.

    The optional demon rotation (fixed angles in ``cfg.demon``) is applied
    to the mechanical block before assembly.  Integration runs to the
    configured horizon, stopping early once the state settles onto the
    steady state (relative Frobenius distance 1e-4) unless ``settle`` is
    False.  The returned trajectory carries the measures named in
    ``cfg.outputs``.
    """
    mech = _mech_init_cm(cfg)
    if cfg.demon is not None and cfg.demon.angles is not None:
        mech = rotate_local(mech, cfg.demon.angles)
    v0 = assemble_initial(mech, cfg.opt_init)

    drift, diffusion = _composed_system(cfg)
    target = None
    if stability(drift):
        target = steady_state(drift, diffusion)
    else:
        warnings.warn(
            "composed drift is not Hurwitz: no steady state exists, "
            "computing the transient over the full window",
            RuntimeWarning,
            stacklevel=2,
        )
    traj = evolve(
        v0, drift, diffusion, _integrator(cfg),
        settle_target=target if settle else None,
    )
    traj.measures = _measure_series(traj, cfg.outputs)
    return traj


def _map_points(fn, argslist):
    n_workers = worker_count()
    if n_workers > 1 and len(argslist) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            return list(pool.map(fn, argslist))
    return [fn(args) for args in argslist]


def _demon_point(args) -> dict:
    cfg, seed, idx, override = args
    if override is not None:
        angles = np.asarray(override, dtype=float)
    else:
        rng = np.random.default_rng((seed, idx))
        angles = rng.uniform(0.0, 2 * np.pi, 2)
    run_cfg = replace(
        cfg,
        demon=DemonSpec(angles=(float(angles[0]), float(angles[1]))),
        outputs=("E_mirrors_vs_fields",),
    )
    traj = run_activation(run_cfg)
    e_max, t_star = max_measure_over_window(traj, "E_mirrors_vs_fields")
    return {
        "sample": idx,
        "theta1": float(angles[0]),
        "theta2": float(angles[1]),
        "E_max": e_max,
        "t_star_s": t_star,
    }


def demon_sample(
    cfg: ScenarioConfig,
    n: int | None = None,
    seed: int | None = None,
    *,
    angles_override: tuple[float, float] | None = None,
) -> SweepResult:
    """Distribution of peak register-ancilla entanglement under random
    local rotations of the register.

    Rotation angles are drawn independently and uniformly on [0, 2 pi) from
    a counter-based generator keyed by (seed, sample index), so identical
    seeds give bit-identical results regardless of scheduling.
    """
    if n is None and cfg.demon is not None:
        n = cfg.demon.samples
    if seed is None and cfg.demon is not None:
        seed = cfg.demon.seed
    if n is None or n < 1:
        raise ValidationError("demon_sample requires a sample count n >= 1")
    if seed is None:
        raise ValidationError("demon_sample requires a seed")

    records = _map_points(
        _demon_point, [(cfg, seed, idx, angles_override) for idx in range(n)]
    )
    return SweepResult(
        axis_name="sample",
        axis_values=list(range(n)),
        records=records,
        metadata={"seed": seed, "n": n, "config": scenario_fingerprint(cfg)},
    )


# ---------------------------------------------------------------------------
# Sweeps (single cavity-mirror unit)
# ---------------------------------------------------------------------------

def _single_unit_run(
    params: OptomechParams,
    mech_occupation: float,
    optical: CovarianceMatrix,
    integrator: IntegratorConfig | None,
) -> tuple[Trajectory, np.ndarray]:
    drift = drift_matrix(params)
    diffusion = diffusion_matrix(params)
    v0 = CovarianceMatrix.direct_sum(
        [CovarianceMatrix.thermal(mech_occupation), optical]
    )
    target = steady_state(drift, diffusion) if stability(drift) else None
    if target is None:
        warnings.warn("unit drift is not Hurwitz; transient only", RuntimeWarning, stacklevel=2)
    cfg = integrator or IntegratorConfig(t_end=10.0 / params.mech_damping)
    traj = evolve(v0, drift, diffusion, cfg, settle_target=target)
    e_vals = np.array([_log_negativity_raw(s, [2]) for s in traj.states])
    return traj, e_vals


def _temperature_point(args) -> dict:
    cfg, temp = args
    params = replace(cfg.params_pair[0], bath_temperature=temp)
    occupation = thermal_occupation(temp, params.mech_frequency)
    traj, e_vals = _single_unit_run(
        params, occupation, CovarianceMatrix.vacuum(1), cfg.integrator
    )
    k = int(np.argmax(e_vals))
    return {"T_K": temp, "E_max": float(e_vals[k]), "t_star_s": float(traj.times[k])}


def temperature_sweep(cfg: ScenarioConfig, temperatures) -> SweepResult:
    """Peak single-unit mirror-field entanglement vs bath temperature.

    Each point runs one unit with the mirror prepared thermally at the bath
    temperature and the field in a coherent state (vacuum fluctuations).
    """
    temps = [float(t) for t in temperatures]
    if not temps or any(t <= 0 for t in temps):
        raise ValidationError("temperature list must be nonempty and positive")
    records = _map_points(_temperature_point, [(cfg, t) for t in temps])
    return SweepResult(
        axis_name="T_K",
        axis_values=temps,
        records=records,
        metadata={"config": scenario_fingerprint(cfg)},
    )


def _squeezing_point(args) -> dict:
    cfg, r = args
    params = cfg.params_pair[0]
    occupation = thermal_occupation(params.bath_temperature, params.mech_frequency)
    optical = CovarianceMatrix.squeezed_vacuum(r, cfg.opt_init.phase)
    traj, e_vals = _single_unit_run(params, occupation, optical, cfg.integrator)
    k = int(np.argmax(e_vals))
    return {
        "r": r,
        "times_s": traj.times.copy(),
        "E_pair": e_vals,
        "E_max": float(e_vals[k]),
        "t_star_s": float(traj.times[k]),
    }


def squeezing_sweep(cfg: ScenarioConfig, squeezings) -> SweepResult:
    """Single-unit mirror-field entanglement over a (time, squeezing) grid.

    Each point runs one unit with a thermal mirror at the configured bath
    temperature and the field squeezed by r (axis angle from the scenario's
    optical init); the full recorded time series is kept per point.
    """
    rs = [float(r) for r in squeezings]
    if not rs or any(r < 0 for r in rs):
        raise ValidationError("squeezing list must be nonempty and non-negative")
    records = _map_points(_squeezing_point, [(cfg, r) for r in rs])
    return SweepResult(
        axis_name="r",
        axis_values=rs,
        records=records,
        metadata={"config": scenario_fingerprint(cfg)},
    )
