"""Gaussian states as covariance matrices, and the correlation measures
computed from them.

Conventions
-----------
Modes are ordered (q1, p1, q2, p2, ...); hbar = 1 and the vacuum variance
is 1/2, so a physical state has every symplectic eigenvalue >= 1/2.  Mode
indices in the public API are 1-based.  All entropies and logarithmic
negativities use the natural logarithm.

All functions are pure; `CovarianceMatrix` instances are immutable and can
be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import (
    DiscordConvergenceError,
    NumericalDegeneracyError,
    UnphysicalStateError,
    ValidationError,
)

_SYMMETRY_TOL = 1e-8
CLAMP_TOL = 1e-9  # measures in [-CLAMP_TOL, 0) are clamped to zero


def symplectic_form(n_modes: int) -> np.ndarray:
    """Standard symplectic form, a direct sum of [[0, 1], [-1, 0]] blocks."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Symmetric 2n x 2n matrix of quadrature second moments.

    The constructor validates shape, symmetry (tolerance 1e-8 relative to
    the largest entry) and positivity of the diagonal, then stores an
    exactly symmetrized, read-only copy.  Physicality is *not* enforced
    here; use :func:`check_physical` (marginally unphysical matrices are
    occasionally useful, e.g. when force-loading external data).
    """

    mat: np.ndarray
    n_modes: int = field(init=False)

    def __post_init__(self):
        m = np.array(self.mat, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"covariance matrix must be square, got shape {m.shape}")
        if m.shape[0] % 2 or m.shape[0] < 2:
            raise ValidationError(f"covariance matrix size must be even and >= 2, got {m.shape[0]}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("covariance matrix contains non-finite entries")
        scale = max(1.0, float(np.abs(m).max()))
        if np.abs(m - m.T).max() > _SYMMETRY_TOL * scale:
            raise ValidationError("covariance matrix is not symmetric within tolerance 1e-8")
        if np.any(np.diag(m) <= 0.0):
            raise ValidationError("covariance matrix has non-positive diagonal entries")
        m = 0.5 * (m + m.T)
        m.flags.writeable = False
        object.__setattr__(self, "mat", m)
        object.__setattr__(self, "n_modes", m.shape[0] // 2)

    # -- constructors ------------------------------------------------------

    @classmethod
    def vacuum(cls, n_modes: int) -> "CovarianceMatrix":
        return cls(0.5 * np.eye(2 * n_modes))

    @classmethod
    def thermal(cls, occupations: float | Sequence[float]) -> "CovarianceMatrix":
        """Thermal (or product-of-thermal) state with the given mean occupations."""
        occ = np.atleast_1d(np.asarray(occupations, dtype=float))
        if np.any(occ < 0):
            raise ValidationError("thermal occupation must be non-negative")
        return cls(np.diag(np.repeat(occ + 0.5, 2)))

    @classmethod
    def squeezed_vacuum(cls, r: float, phase: float = 0.0) -> "CovarianceMatrix":
        """Single-mode squeezed vacuum; phase rotates the squeezing axis."""
        if r < 0:
            raise ValidationError("squeezing parameter must be non-negative")
        base = np.diag([np.exp(-2 * r), np.exp(2 * r)]) / 2
        rot = _rotation_block(phase)
        return cls(rot @ base @ rot.T)

    @classmethod
    def two_mode_squeezed_vacuum(cls, r: float) -> "CovarianceMatrix":
        """Two-mode squeezed vacuum with squeezing parameter r."""
        if r < 0:
            raise ValidationError("squeezing parameter must be non-negative")
        a = 0.5 * np.cosh(2 * r)
        c = 0.5 * np.sinh(2 * r)
        m = a * np.eye(4)
        m[0, 2] = m[2, 0] = c
        m[1, 3] = m[3, 1] = -c
        return cls(m)

    @classmethod
    def direct_sum(cls, parts: Iterable["CovarianceMatrix"]) -> "CovarianceMatrix":
        """Block-diagonal composition (tensor product of uncorrelated states)."""
        mats = [p.mat for p in parts]
        if not mats:
            raise ValidationError("direct_sum needs at least one factor")
        size = sum(m.shape[0] for m in mats)
        out = np.zeros((size, size))
        k = 0
        for m in mats:
            out[k:k + m.shape[0], k:k + m.shape[0]] = m
            k += m.shape[0]
        return cls(out)

    # -- accessors ---------------------------------------------------------

    def block(self, i: int, j: int) -> np.ndarray:
        """2x2 block coupling modes i and j (1-based)."""
        for k in (i, j):
            if not 1 <= k <= self.n_modes:
                raise ValidationError(f"mode index {k} out of range 1..{self.n_modes}")
        return self.mat[2 * (i - 1):2 * i, 2 * (j - 1):2 * j].copy()


def _rotation_block(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def _mode_indices(modes: Iterable[int], n_modes: int) -> list[int]:
    out = sorted(set(int(m) for m in modes))
    for m in out:
        if not 1 <= m <= n_modes:
            raise ValidationError(f"mode index {m} out of range 1..{n_modes}")
    return out


# ---------------------------------------------------------------------------
# Symplectic spectra
# ---------------------------------------------------------------------------

def _symplectic_eigenvalues_raw(mat: np.ndarray, imag_tol: float = 1e-8) -> np.ndarray:
    """Symplectic eigenvalues of a symmetric matrix, ascending.

    Computed as the moduli of the spectrum of i*Omega*M, which come in
    +/- pairs; the pairs are collapsed by averaging adjacent sorted values.
    """
    n = mat.shape[0] // 2
    ev = np.linalg.eigvals(1j * symplectic_form(n) @ mat)
    scale = max(1.0, float(np.abs(ev).max()))
    if np.abs(ev.imag).max() > imag_tol * scale:
        raise NumericalDegeneracyError(
            "symplectic spectrum has non-real eigenvalues beyond tolerance "
            f"(max imaginary part {np.abs(ev.imag).max():.3e})"
        )
    moduli = np.sort(np.abs(ev))
    return 0.5 * (moduli[0::2] + moduli[1::2])


def symplectic_eigenvalues(cm: CovarianceMatrix) -> np.ndarray:
    """The n symplectic eigenvalues of a covariance matrix, sorted ascending.

    For a physical state every value is >= 1/2; pure modes sit exactly at
    1/2.
    """
    return _symplectic_eigenvalues_raw(cm.mat)


def check_physical(cm: CovarianceMatrix, tol: float = CLAMP_TOL) -> bool:
    """Bona-fide test: every symplectic eigenvalue >= 1/2 - tol."""
    return bool(symplectic_eigenvalues(cm)[0] >= 0.5 - tol)


def _require_physical(cm: CovarianceMatrix, tol: float = 1e-6) -> None:
    nu_min = _symplectic_eigenvalues_raw(cm.mat)[0]
    if nu_min < 0.5 - tol:
        raise UnphysicalStateError(
            f"state is unphysical: smallest symplectic eigenvalue {nu_min:.6g} < 1/2"
        )


# ---------------------------------------------------------------------------
# Logarithmic negativity and separability
# ---------------------------------------------------------------------------

def partial_transpose(cm: CovarianceMatrix, modes: Iterable[int]) -> CovarianceMatrix:
    """Momentum-sign flip on the given modes (1-based)."""
    idx = _mode_indices(modes, cm.n_modes)
    return CovarianceMatrix(_partial_transpose_raw(cm.mat, idx))


def _partial_transpose_raw(mat: np.ndarray, modes: list[int]) -> np.ndarray:
    signs = np.ones(mat.shape[0])
    for m in modes:
        signs[2 * (m - 1) + 1] = -1.0
    return mat * np.outer(signs, signs)


def _log_negativity_raw(mat: np.ndarray, modes: list[int]) -> float:
    nu = _symplectic_eigenvalues_raw(_partial_transpose_raw(mat, modes))
    return float(np.sum(np.maximum(0.0, -np.log(2.0 * nu))))


def log_negativity(cm: CovarianceMatrix, partition: Iterable[int]) -> float:
    """Logarithmic negativity across ``partition`` vs the remaining modes.

    The modes in ``partition`` are partially transposed; the result is
    sum_k max(0, -ln 2 nu_k) over the symplectic spectrum nu of the
    transposed matrix.  For two-mode states this is the familiar
    max(0, -ln 2 nu_minus).

    Parameters
    ----------
    cm:
        Physical state.
    partition:
        Proper nonempty subset of mode indices (1-based).
    """
    idx = _mode_indices(partition, cm.n_modes)
    if not idx or len(idx) >= cm.n_modes:
        raise ValidationError("partition must be a proper nonempty subset of the modes")
    _require_physical(cm)
    return _log_negativity_raw(cm.mat, idx)


def ppt_separable(cm: CovarianceMatrix, tol: float = CLAMP_TOL) -> bool:
    """Simon's PPT test for two-mode states (necessary and sufficient).

    True iff the smallest partial-transpose symplectic eigenvalue is
    >= 1/2 - tol.
    """
    if cm.n_modes != 2:
        raise ValidationError("PPT separability test is defined for two-mode states")
    _require_physical(cm)
    nu = _symplectic_eigenvalues_raw(_partial_transpose_raw(cm.mat, [2]))
    return bool(nu[0] >= 0.5 - tol)


# ---------------------------------------------------------------------------
# Local operations
# ---------------------------------------------------------------------------

def rotate_local(cm: CovarianceMatrix, angles: Sequence[float]) -> CovarianceMatrix:
    """Apply independent phase-space rotations to each mode.

    The rotation is the symplectic direct sum of [[cos t, sin t],
    [-sin t, cos t]] blocks; symplectic eigenvalues are unchanged.
    """
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (cm.n_modes,):
        raise ValidationError(
            f"expected {cm.n_modes} angles (one per mode), got {angles.shape}"
        )
    if not np.all(np.isfinite(angles)):
        raise ValidationError("rotation angles must be finite")
    angles = np.mod(angles, 2 * np.pi)
    rot = np.zeros_like(cm.mat)
    for k, th in enumerate(angles):
        rot[2 * k:2 * k + 2, 2 * k:2 * k + 2] = _rotation_block(th)
    return CovarianceMatrix(rot @ cm.mat @ rot.T)


def reduce_modes(cm: CovarianceMatrix, keep: Iterable[int]) -> CovarianceMatrix:
    """Gaussian partial trace: principal submatrix on the kept modes."""
    idx = _mode_indices(keep, cm.n_modes)
    if not idx:
        raise ValidationError("keep set must be nonempty")
    rows = np.concatenate([[2 * (m - 1), 2 * m - 1] for m in idx])
    return CovarianceMatrix(cm.mat[np.ix_(rows, rows)])


def strip_correlations(cm: CovarianceMatrix) -> CovarianceMatrix:
    """Tensor product of the single-mode reductions of a two-mode state."""
    if cm.n_modes != 2:
        raise ValidationError("strip_correlations is defined for two-mode states")
    out = cm.mat.copy()
    out[:2, 2:] = 0.0
    out[2:, :2] = 0.0
    return CovarianceMatrix(out)


def mean_occupation(cm: CovarianceMatrix) -> float:
    """Mean excitation number of a single-mode state: (v_qq + v_pp)/2 - 1/2."""
    if cm.n_modes != 1:
        raise ValidationError("mean_occupation is defined for single-mode states")
    _require_physical(cm)
    return float(0.5 * (cm.mat[0, 0] + cm.mat[1, 1]) - 0.5)


# ---------------------------------------------------------------------------
# Gaussian discord
# ---------------------------------------------------------------------------

def thermal_entropy(x):
    """Entropy function f(x) = ((x+1)/2) ln((x+1)/2) - ((x-1)/2) ln((x-1)/2).

    Natural logarithm.  Arguments are twice the symplectic eigenvalue, so a
    pure mode gives f(1) = 0; values below 1 (roundoff) also map to 0.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = x > 1.0 + 1e-15
    xp = 0.5 * (x[m] + 1.0)
    xm = 0.5 * (x[m] - 1.0)
    out[m] = xp * np.log(xp) - xm * np.log(xm)
    return float(out) if out.ndim == 0 else out


def _measurement_seed_cms(s: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Batch of rotated squeezed single-mode CMs, shape (..., 2, 2)."""
    c, sn = np.cos(phi), np.sin(phi)
    e_m, e_p = 0.5 * np.exp(-2 * s), 0.5 * np.exp(2 * s)
    v00 = c * c * e_m + sn * sn * e_p
    v11 = sn * sn * e_m + c * c * e_p
    v01 = c * sn * (e_m - e_p)
    return np.stack(
        [np.stack([v00, v01], axis=-1), np.stack([v01, v11], axis=-1)], axis=-2
    )


def _conditional_det_batch(a1, gam, a2, v0_batch):
    """det of the Schur complement a1 - gam (a2 + v0)^-1 gam^T, batched over v0."""
    m = a2 + v0_batch
    det_m = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    inv = np.empty_like(m)
    inv[..., 0, 0] = m[..., 1, 1]
    inv[..., 1, 1] = m[..., 0, 0]
    inv[..., 0, 1] = -m[..., 0, 1]
    inv[..., 1, 0] = -m[..., 1, 0]
    inv /= det_m[..., None, None]
    eps = a1 - np.einsum("ij,...jk,lk->...il", gam, inv, gam)
    return eps[..., 0, 0] * eps[..., 1, 1] - eps[..., 0, 1] * eps[..., 1, 0]


def _min_conditional_det(a1, gam, a2, squeeze_max, grid_shape, refine):
    """Infimum of det(eps) over single-mode rotated squeezed measurement seeds.

    Coarse grid over (s, phi) followed by a local simplex refinement.  The
    entropy f is monotone in the determinant, so minimizing det(eps) also
    minimizes f.
    """
    n_s, n_phi = grid_shape
    s_grid = np.linspace(0.0, squeeze_max, n_s)
    phi_grid = np.linspace(0.0, np.pi, n_phi, endpoint=False)
    ss, pp = np.meshgrid(s_grid, phi_grid, indexing="ij")
    dets = _conditional_det_batch(a1, gam, a2, _measurement_seed_cms(ss, pp))
    if not np.all(np.isfinite(dets)):
        raise DiscordConvergenceError("conditional covariance determinant is non-finite on the search grid")
    k = np.unravel_index(int(np.argmin(dets)), dets.shape)
    best = float(dets[k])
    if not refine:
        return best

    def objective(x):
        v0 = _measurement_seed_cms(np.asarray(x[0]), np.asarray(x[1]))
        return float(_conditional_det_batch(a1, gam, a2, v0[None, ...])[0])

    res = minimize(
        objective,
        x0=[ss[k], pp[k]],
        method="Nelder-Mead",
        bounds=[(0.0, squeeze_max), (0.0, np.pi)],
        options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 400},
    )
    if not np.isfinite(res.fun):
        raise DiscordConvergenceError(
            f"infimum refinement diverged at (s, phi) = {tuple(res.x)}"
        )
    return min(best, float(res.fun))


def gaussian_discord(
    cm: CovarianceMatrix,
    measured_mode: int = 2,
    *,
    squeeze_max: float = 5.0,
    grid_shape: tuple[int, int] = (48, 32),
    refine: bool = True,
) -> float:
    """Gaussian quantum discord of a two-mode state.

    A Gaussian measurement (parameterized by a rotated squeezed seed state,
    squeezing in [0, squeeze_max], angle in [0, pi)) is applied to
    ``measured_mode``; the discord is the gap between total and classical
    correlations minimized over the measurement:

        D = f(x_m) - f(m_-) - f(m_+) + inf f(x_eps)

    where f is :func:`thermal_entropy`, x_m is twice the square root of the
    measured mode's reduced determinant, m_-+ are twice the symplectic
    eigenvalues of the full state, and x_eps is twice the square root of
    the conditional (Schur-complement) determinant.  All arguments are
    rescaled by 2 so the vacuum maps to f(1) = 0.

    Results in [-1e-9, 0) clamp to exactly 0.  The infimum is a numeric
    grid-plus-refinement search; ``grid_shape`` and ``squeeze_max`` trade
    accuracy for speed.
    """
    if cm.n_modes != 2:
        raise ValidationError("gaussian discord is defined for two-mode states")
    if measured_mode not in (1, 2):
        raise ValidationError("measured_mode must be 1 or 2")
    _require_physical(cm)

    mat = cm.mat
    if measured_mode == 1:
        perm = [2, 3, 0, 1]
        mat = mat[np.ix_(perm, perm)]
    a1 = mat[:2, :2]
    a2 = mat[2:, 2:]
    gam = mat[:2, 2:]

    x_measured = 2.0 * np.sqrt(max(np.linalg.det(a2), 0.0))
    mu = _symplectic_eigenvalues_raw(mat)
    det_min = _min_conditional_det(a1, gam, a2, squeeze_max, grid_shape, refine)
    x_eps = 2.0 * np.sqrt(max(det_min, 0.0))

    d = (
        thermal_entropy(x_measured)
        - thermal_entropy(2.0 * mu[0])
        - thermal_entropy(2.0 * mu[1])
        + thermal_entropy(x_eps)
    )
    if d < -CLAMP_TOL:
        raise NumericalDegeneracyError(
            f"gaussian discord evaluated to {d:.3e} < -1e-9; state may be "
            "marginally unphysical or the infimum search under-resolved"
        )
    return max(0.0, float(d))
