"""Physical cavity-mirror parameters and the linearized drift/diffusion
matrices they generate.

A single unit is one laser-driven optical resonator with a movable end
mirror.  The fluctuation dynamics around the classical working point is
linear, with a 4x4 drift matrix acting on (Q, P, x, y) = (mirror position,
mirror momentum, field amplitude quadrature, field phase quadrature) and a
diagonal diffusion matrix fixed by the thermal and vacuum inputs.  Two
non-interacting units compose block-wise into 8x8 matrices in the global
ordering (Q1, P1, Q2, P2, x1, y1, x2, y2): mirrors first, then fields.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT, hbar as HBAR, k as K_BOLTZMANN

from .errors import MultistabilityError, NoSteadyStateError, ValidationError

# Composition maps a unit's local (Q, P, x, y) rows into the global
# mirrors-first ordering, so the mirrors-vs-fields split is contiguous.
UNIT_SLOTS = ([0, 1, 4, 5], [2, 3, 6, 7])


@dataclass(frozen=True)
class OptomechParams:
    """Physical constants of one cavity-mirror unit (SI, angular rates).

    ``detuning`` is the effective cavity-laser detuning in rad/s; when None
    it defaults to the mechanical frequency (the standard operating point).
    Set ``bare_detuning`` instead to solve the detuning self-consistently
    with the static radiation-pressure shift.  ``diffusion_form`` selects
    the mechanical noise strength: "occupation" uses gamma_m (2 nbar + 1),
    valid at all temperatures; "high_temperature" uses the Markovian
    Brownian limit 2 gamma_m k_B T / (hbar omega_m).
    """

    mass: float = 145e-12                      # kg
    mech_frequency: float = 2 * np.pi * 947e3  # rad/s
    mech_damping: float = 2 * np.pi * 140.0    # rad/s
    cavity_decay: float = 2 * np.pi * 215e3    # rad/s
    cavity_length: float = 25e-3               # m
    pump_power: float = 11e-3                  # W
    laser_wavelength: float = 1064e-9          # m
    bath_temperature: float = 0.4              # K
    detuning: float | None = None              # rad/s; None -> mech_frequency
    bare_detuning: float | None = None         # rad/s; triggers self-consistent solve
    diffusion_form: str = "occupation"

    def __post_init__(self):
        for name in ("mass", "mech_frequency", "mech_damping", "cavity_decay",
                     "cavity_length", "laser_wavelength"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.pump_power < 0:
            raise ValidationError("pump_power must be non-negative")
        if self.bath_temperature < 0:
            raise ValidationError("bath_temperature must be non-negative")
        if self.mech_damping >= self.mech_frequency:
            raise ValidationError(
                "mech_damping must be well below mech_frequency (high mechanical Q)"
            )
        if self.detuning is not None and not np.isfinite(self.detuning):
            raise ValidationError("detuning must be finite")
        if self.diffusion_form not in ("occupation", "high_temperature"):
            raise ValidationError(
                f"unknown diffusion_form {self.diffusion_form!r}; "
                "expected 'occupation' or 'high_temperature'"
            )

    @classmethod
    def defaults(cls, **overrides) -> "OptomechParams":
        """Experimental reference parameter set, with optional overrides."""
        return replace(cls(), **overrides) if overrides else cls()

    @property
    def laser_frequency(self) -> float:
        """Drive laser angular frequency, 2 pi c / lambda."""
        return 2 * np.pi * SPEED_OF_LIGHT / self.laser_wavelength

    @property
    def frequency_pull(self) -> float:
        """Cavity frequency shift per unit mirror displacement (rad/s/m).

        The cavity is quasi-resonant with the drive, so the drive frequency
        stands in for the cavity frequency.
        """
        return self.laser_frequency / self.cavity_length

    @property
    def vacuum_coupling(self) -> float:
        """Single-quantum radiation-pressure rate, chi * x_zpf (rad/s)."""
        return self.frequency_pull * np.sqrt(HBAR / (2 * self.mass * self.mech_frequency))

    @property
    def effective_detuning(self) -> float:
        return self.mech_frequency if self.detuning is None else self.detuning


def drive_amplitude(params: OptomechParams) -> float:
    """Pump drive rate sqrt(2 kappa P / (hbar omega_L)), in 1/s."""
    return float(np.sqrt(
        2 * params.cavity_decay * params.pump_power / (HBAR * params.laser_frequency)
    ))


def steady_field(params: OptomechParams) -> tuple[complex, float]:
    """Classical intracavity amplitude and effective detuning (c_s, Delta).

    With an explicit detuning, c_s = E / (kappa + i Delta) directly.  With
    ``bare_detuning`` set, the static radiation-pressure shift makes
    |c_s|^2 the root of a cubic; the stable root of smallest magnitude is
    returned, and a :class:`MultistabilityError` lists all roots if none is
    stable.
    """
    e_amp = drive_amplitude(params)
    kappa = params.cavity_decay

    if params.bare_detuning is None:
        delta = params.effective_detuning
        return e_amp / (kappa + 1j * delta), float(delta)

    delta0 = params.bare_detuning
    shift = HBAR * params.frequency_pull ** 2 / (params.mass * params.mech_frequency ** 2)
    if e_amp == 0.0:
        return 0.0 + 0.0j, float(delta0)
    # |c|^2 (kappa^2 + (delta0 - shift |c|^2)^2) = E^2, cubic in u = |c|^2
    coeffs = [shift ** 2, -2 * delta0 * shift, kappa ** 2 + delta0 ** 2, -e_amp ** 2]
    roots = np.roots(coeffs)
    real_roots = sorted(
        float(r.real) for r in roots
        if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and r.real > 0.0
    )
    candidates = []
    for u in real_roots:
        delta = delta0 - shift * u
        c_s = e_amp / (kappa + 1j * delta)
        trial = replace(params, bare_detuning=None, detuning=delta)
        if stability(drift_matrix(trial)):
            candidates.append((u, c_s, delta))
    if not candidates:
        raise MultistabilityError(
            "no stable self-consistent field amplitude; |c_s|^2 roots: "
            + ", ".join(f"{u:.6e}" for u in real_roots)
        )
    u, c_s, delta = candidates[0]  # smallest |c_s| among stable roots
    return c_s, float(delta)


def drift_matrix(params: OptomechParams) -> np.ndarray:
    """4x4 linearized drift matrix on (Q, P, x, y), entries in rad/s."""
    c_s, delta = steady_field(params)
    g2re = 2 * params.vacuum_coupling * c_s.real
    g2im = 2 * params.vacuum_coupling * c_s.imag
    wm = params.mech_frequency
    return np.array([
        [0.0, wm, 0.0, 0.0],
        [-wm, -params.mech_damping, g2re, g2im],
        [-g2im, 0.0, -params.cavity_decay, delta],
        [g2re, 0.0, -delta, -params.cavity_decay],
    ])


def thermal_occupation(temperature: float, frequency: float) -> float:
    """Bose occupation 1/(exp(hbar w / kB T) - 1); zero at T = 0."""
    if temperature < 0:
        raise ValidationError("temperature must be non-negative")
    if frequency <= 0:
        raise ValidationError("frequency must be positive")
    if temperature == 0.0:
        return 0.0
    return float(1.0 / np.expm1(HBAR * frequency / (K_BOLTZMANN * temperature)))


def diffusion_matrix(params: OptomechParams) -> np.ndarray:
    """Diagonal 4x4 noise matrix diag(0, D_m, kappa, kappa), in rad/s.

    The optical entries follow from the sqrt(2 kappa) input coupling and
    the symmetrized vacuum correlation 1/2.  The mechanical momentum entry
    depends on ``params.diffusion_form``; the two forms agree to O(1/nbar)
    at high temperature.
    """
    if params.diffusion_form == "high_temperature":
        d_m = 2 * params.mech_damping * K_BOLTZMANN * params.bath_temperature / (
            HBAR * params.mech_frequency)
    else:
        nbar = thermal_occupation(params.bath_temperature, params.mech_frequency)
        d_m = params.mech_damping * (2 * nbar + 1)
    return np.diag([0.0, d_m, params.cavity_decay, params.cavity_decay])


def stability(drift: np.ndarray) -> bool:
    """True iff the drift matrix is Hurwitz (all eigenvalues in Re < 0)."""
    drift = np.asarray(drift, dtype=float)
    if drift.ndim != 2 or drift.shape[0] != drift.shape[1]:
        raise ValidationError("drift matrix must be square")
    return bool(np.all(np.linalg.eigvals(drift).real < 0.0))


def compose_pair(
    a: tuple[np.ndarray, np.ndarray], b: tuple[np.ndarray, np.ndarray]
) -> tuple[np.ndarray, np.ndarray]:
    """Block-compose two non-interacting 4x4 units into 8x8 matrices.

    Rows and columns are permuted to the global ordering (Q1, P1, Q2, P2,
    x1, y1, x2, y2) so the mirrors-vs-fields bipartition is a contiguous
    split.
    """
    out = []
    for part in range(2):
        big = np.zeros((8, 8))
        for (k4, slots) in zip((a[part], b[part]), UNIT_SLOTS):
            k4 = np.asarray(k4, dtype=float)
            if k4.shape != (4, 4):
                raise ValidationError(f"expected 4x4 unit matrices, got {k4.shape}")
            big[np.ix_(slots, slots)] = k4
        out.append(big)
    return out[0], out[1]
