"""Covariance dynamics under linear dissipative evolution.

The second moments of a linear Langevin system with delta-correlated noise
obey the deterministic matrix ODE

    dV/dt = K V + V K^T + D,

which is integrated here with an embedded Dormand-Prince 5(4) pair
(adaptive step, per-step symmetrization of V).  The t -> infinity limit,
when the drift is Hurwitz, is the algebraic steady state K V + V K^T + D =
0, solved as a dense linear system over the independent entries of V.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoSteadyStateError, NumericalError, StiffnessError, ValidationError
from .gaussian import CovarianceMatrix, _log_negativity_raw, _symplectic_eigenvalues_raw
from .model import stability

# Dormand-Prince 5(4) tableau; the first row of weights propagates the
# 5th-order solution, the second is the embedded 4th-order estimate.
_DP_A = np.zeros((7, 7))
_DP_A[1, 0] = 1 / 5
_DP_A[2, :2] = (3 / 40, 9 / 40)
_DP_A[3, :3] = (44 / 45, -56 / 15, 32 / 9)
_DP_A[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_DP_A[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_DP_A[6, :6] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                   -92097 / 339200, 187 / 2100, 1 / 40])
_DP_ERR = _DP_B5 - _DP_B4


@dataclass(frozen=True)
class IntegratorConfig:
    """Adaptive-integration controls.

    ``dt_max`` caps the step (seconds); ``t_end`` is the integration
    horizon; every ``record_stride``-th accepted step is recorded (plus the
    initial and final states).
    """

    t_end: float
    dt_max: float = np.inf
    rel_tol: float = 1e-7
    abs_tol: float = 1e-12
    record_stride: int = 1

    def __post_init__(self):
        if self.t_end <= 0 or not np.isfinite(self.t_end):
            raise ValidationError("t_end must be positive and finite")
        if self.dt_max <= 0:
            raise ValidationError("dt_max must be positive")
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not 0 < v <= 1e-2:
                raise ValidationError(f"{name} must lie in (0, 1e-2]")
        if self.record_stride < 1:
            raise ValidationError("record_stride must be a positive integer")


@dataclass
class Trajectory:
    """Recorded covariance evolution: times (s), states, optional measures.

    ``states[k]`` is the symmetric matrix at ``times[k]``; ``measures``
    maps a measure name to its per-time array.  times[0] is always 0.
    """

    times: np.ndarray
    states: list[np.ndarray]
    measures: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.states):
            raise ValidationError("times and states must have equal length")
        if len(self.times) == 0 or self.times[0] != 0.0:
            raise ValidationError("trajectory must start at t = 0")
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("times must be strictly increasing")
        for key, vals in self.measures.items():
            if len(vals) != len(self.times):
                raise ValidationError(f"measure {key!r} length mismatch")

    def state(self, k: int) -> CovarianceMatrix:
        return CovarianceMatrix(self.states[k])

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def evolve(
    v0: CovarianceMatrix | np.ndarray,
    drift: np.ndarray,
    diffusion: np.ndarray,
    cfg: IntegratorConfig,
    *,
    settle_target: np.ndarray | None = None,
    settle_rtol: float = 1e-4,
) -> Trajectory:
    """Integrate dV/dt = K V + V K^T + D from ``v0`` up to ``cfg.t_end``.

    The initial state must be physical.  When ``settle_target`` is given
    (normally the algebraic steady state), integration stops early at the
    first accepted step whose state is within ``settle_rtol`` of the target
    in relative Frobenius norm; this implements the dynamical window that
    precedes steady-state conditions.

    The matrix equation is flattened so each Runge-Kutta stage is a single
    matrix-vector product; V is re-symmetrized after every accepted step.

    Raises
    ------
    StiffnessError
        If the accepted step size underflows; tighten tolerances or reduce
        ``t_end``.
    """
    if not isinstance(v0, CovarianceMatrix):
        v0 = CovarianceMatrix(v0)  # validates shape and symmetry
    drift = np.asarray(drift, dtype=float)
    diffusion = np.asarray(diffusion, dtype=float)
    n = v0.mat.shape[0]
    if drift.shape != (n, n) or diffusion.shape != (n, n):
        raise ValidationError(
            f"dimension mismatch: state {v0.mat.shape}, drift {drift.shape}, "
            f"diffusion {diffusion.shape}"
        )
    nu0 = _symplectic_eigenvalues_raw(v0.mat)[0]
    if nu0 < 0.5 - 1e-6:
        raise ValidationError(
            f"initial state is unphysical (min symplectic eigenvalue {nu0:.6g})"
        )

    # flatten: vec(K V + V K^T + D) = A vec(V) + vec(D), row-major
    eye = np.eye(n)
    a_op = np.kron(drift, eye) + np.kron(eye, drift)
    d_vec = diffusion.reshape(-1)
    v = v0.mat.reshape(-1).copy()
    transpose_idx = np.arange(n * n).reshape(n, n).T.reshape(-1)

    settle_norm = None
    if settle_target is not None:
        settle_target = np.asarray(settle_target, dtype=float).reshape(-1)
        settle_norm = settle_rtol * np.linalg.norm(settle_target)

    t_end = cfg.t_end
    times = [0.0]
    states = [v0.mat.copy()]

    stages = np.empty((7, n * n))
    stages[0] = a_op @ v + d_vec
    v_norm = max(np.linalg.norm(v), cfg.abs_tol)
    h = min(cfg.dt_max, t_end,
            1e-2 * v_norm / max(np.linalg.norm(stages[0]), 1e-300))

    t = 0.0
    accepted = 0
    h_floor = 1e-15 * t_end
    while t < t_end:
        h = min(h, t_end - t)
        if h < h_floor or t + h == t:
            raise StiffnessError(
                f"step size underflow at t = {t:.6e} s (h = {h:.3e}); "
                "tighten tolerances or shorten t_end"
            )
        for i in range(1, 7):
            acc = v + h * (_DP_A[i, :i] @ stages[:i])
            stages[i] = a_op @ acc + d_vec
        v_new = v + h * (_DP_B5 @ stages)
        err_vec = h * (_DP_ERR @ stages)
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(v), np.abs(v_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))

        if err <= 1.0:
            t += h
            v = 0.5 * (v_new + v_new[transpose_idx])  # symmetrize
            stages[0] = a_op @ v + d_vec
            accepted += 1
            settled = (
                settle_norm is not None
                and np.linalg.norm(v - settle_target) <= settle_norm
            )
            if accepted % cfg.record_stride == 0 or t >= t_end or settled:
                if times[-1] < t:
                    times.append(t)
                    states.append(v.reshape(n, n).copy())
            if settled:
                break
        factor = 0.9 * err ** -0.2 if err > 0 else 5.0
        h = min(h * min(max(factor, 0.2), 5.0), cfg.dt_max)

    if times[-1] < t:  # make sure the final state is recorded
        times.append(t)
        states.append(v.reshape(n, n).copy())
    return Trajectory(times=np.array(times), states=states)


def steady_state(drift: np.ndarray, diffusion: np.ndarray) -> np.ndarray:
    """Solve K V + V K^T + D = 0 for the unique symmetric PSD V.

    The equation is assembled as a dense linear system over the n(2n+1)
    independent entries of V.  The drift must be Hurwitz; the residual is
    verified against 1e-10 * ||D||.
    """
    drift = np.asarray(drift, dtype=float)
    diffusion = np.asarray(diffusion, dtype=float)
    n = drift.shape[0]
    if drift.shape != (n, n) or diffusion.shape != (n, n):
        raise ValidationError("drift and diffusion must be square matrices of equal size")
    if not stability(drift):
        raise NoSteadyStateError("drift matrix is not Hurwitz: no steady state exists")

    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    index = {p: k for k, p in enumerate(pairs)}
    m = np.zeros((len(pairs), len(pairs)))
    rhs = np.empty(len(pairs))
    for row, (i, j) in enumerate(pairs):
        rhs[row] = -diffusion[i, j]
        for k in range(n):
            # (K V)_ij term: K[i, k] V[k, j]
            col = index[(k, j) if k <= j else (j, k)]
            m[row, col] += drift[i, k]
            # (V K^T)_ij term: V[i, k] K[j, k]
            col = index[(i, k) if i <= k else (k, i)]
            m[row, col] += drift[j, k]
    sol = np.linalg.solve(m, rhs)

    v = np.empty((n, n))
    for (i, j), k in index.items():
        v[i, j] = v[j, i] = sol[k]
    residual = np.linalg.norm(drift @ v + v @ drift.T + diffusion)
    if residual > 1e-10 * max(np.linalg.norm(diffusion), 1e-300):
        raise NumericalError(
            f"steady-state residual {residual:.3e} exceeds tolerance; "
            "the drift matrix is likely near-singular"
        )
    return v


def max_measure_over_window(
    traj: Trajectory,
    measure: str = "E_mirrors_vs_fields",
    partition: tuple[int, ...] | None = None,
) -> tuple[float, float]:
    """Maximum of a measure over the trajectory window and its time.

    Uses the recorded ``measure`` array when present; otherwise
    ``partition`` must be given and the log-negativity across it is
    computed from the recorded states.  Ties resolve to the earliest time.
    """
    if len(traj.times) == 0:
        raise ValidationError("empty trajectory")
    if measure in traj.measures:
        vals = np.asarray(traj.measures[measure], dtype=float)
    elif partition is not None:
        idx = sorted(int(m) for m in partition)
        vals = np.array([_log_negativity_raw(s, idx) for s in traj.states])
    else:
        raise ValidationError(
            f"measure {measure!r} not recorded and no partition given"
        )
    k = int(np.argmax(vals))
    return float(vals[k]), float(traj.times[k])
