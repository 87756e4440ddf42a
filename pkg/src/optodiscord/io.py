"""File formats: covariance-matrix files, parameter and scenario configs,
and the delimited output written by the CLI.

Matrix files are plain text: first line is the mode count, followed by the
2n rows of the matrix.  Parameter files are flat ``key = value`` text with
units encoded in the key names (converted to SI angular rates on load,
which is echoed for audit).  Scenario files are INI-style with sections
for the two units, the initial states, the demon, and the integrator.
All numbers in delimited output carry 17 significant digits so a written
value re-reads bit-identically.
"""

from __future__ import annotations

import configparser
import logging
from pathlib import Path

import numpy as np

from .dynamics import IntegratorConfig, Trajectory
from .errors import UnphysicalStateError, ValidationError
from .gaussian import CovarianceMatrix, _symplectic_eigenvalues_raw
from .model import OptomechParams
from .protocol import (
    DemonSpec,
    MechInitSpec,
    OptInitSpec,
    ScenarioConfig,
    SweepResult,
)

log = logging.getLogger(__name__)

_FMT = "{:.17g}"


def _tool_version() -> str:
    from . import __version__
    return __version__


# ---------------------------------------------------------------------------
# Covariance-matrix files
# ---------------------------------------------------------------------------

def write_matrix(path, cm: CovarianceMatrix) -> None:
    """Write a covariance matrix: mode count, then one row per line."""
    lines = [str(cm.n_modes)]
    for row in cm.mat:
        lines.append(" ".join(_FMT.format(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path, force: bool = False) -> CovarianceMatrix:
    """Read a covariance-matrix file.

    Asymmetric (tolerance 1e-8) or unphysical matrices are rejected unless
    ``force`` is set, in which case the acceptance is logged.
    """
    text = Path(path).read_text()
    rows = [line for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    if not rows:
        raise ValidationError(f"matrix file {path} is empty")
    try:
        n_modes = int(rows[0].strip())
    except ValueError as exc:
        raise ValidationError(f"matrix file {path}: first line must be the mode count") from exc
    expected = 2 * n_modes
    if len(rows) - 1 != expected:
        raise ValidationError(
            f"matrix file {path}: expected {expected} matrix rows, found {len(rows) - 1}"
        )
    try:
        mat = np.array([[float(x) for x in row.split()] for row in rows[1:]])
    except ValueError as exc:
        raise ValidationError(f"matrix file {path}: malformed numeric entry") from exc
    if mat.shape != (expected, expected):
        raise ValidationError(
            f"matrix file {path}: expected a {expected}x{expected} matrix, got {mat.shape}"
        )
    scale = max(1.0, float(np.abs(mat).max()))
    asym = float(np.abs(mat - mat.T).max())
    if asym > 1e-8 * scale:
        if not force:
            raise ValidationError(
                f"matrix file {path}: asymmetry {asym:.3e} exceeds tolerance (use force to accept)"
            )
        log.warning("force-accepting asymmetric matrix from %s (asymmetry %.3e)", path, asym)
        mat = 0.5 * (mat + mat.T)
    cm = CovarianceMatrix(mat)
    nu_min = _symplectic_eigenvalues_raw(cm.mat)[0]
    if nu_min < 0.5 - 1e-9:
        if not force:
            raise UnphysicalStateError(
                f"matrix file {path}: unphysical state (min symplectic eigenvalue "
                f"{nu_min:.9g}); use force to accept"
            )
        log.warning(
            "force-accepting unphysical matrix from %s (min symplectic eigenvalue %.9g)",
            path, nu_min,
        )
    return cm


# ---------------------------------------------------------------------------
# Parameter files
# ---------------------------------------------------------------------------

_TWO_PI = 2 * np.pi

# key -> (OptomechParams field, SI conversion)
_PARAM_KEYS = {
    "mass_ng": ("mass", 1e-12),
    "mech_freq_khz_over_2pi": ("mech_frequency", 1e3 * _TWO_PI),
    "mech_freq_krad_per_s": ("mech_frequency", 1e3),
    "mech_damping_hz_over_2pi": ("mech_damping", _TWO_PI),
    "cavity_decay_khz_over_2pi": ("cavity_decay", 1e3 * _TWO_PI),
    "cavity_length_mm": ("cavity_length", 1e-3),
    "pump_power_mw": ("pump_power", 1e-3),
    "laser_wavelength_nm": ("laser_wavelength", 1e-9),
    "bath_temp_K": ("bath_temperature", 1.0),
    "detuning_khz_over_2pi": ("detuning", 1e3 * _TWO_PI),
    "bare_detuning_khz_over_2pi": ("bare_detuning", 1e3 * _TWO_PI),
}


def params_from_items(items: dict, context: str = "parameters") -> OptomechParams:
    """Build OptomechParams from unit-suffixed keys, echoing SI values."""
    kwargs = {}
    for key, raw in items.items():
        key = key.strip().lower()
        if key == "diffusion_form":
            kwargs["diffusion_form"] = str(raw).strip()
            continue
        if key == "detuning":
            if str(raw).strip() != "mech_frequency":
                raise ValidationError(
                    f"{context}: key 'detuning' only accepts 'mech_frequency'; "
                    "use detuning_khz_over_2pi for explicit values"
                )
            kwargs["detuning"] = None
            continue
        if key not in _PARAM_KEYS:
            raise ValidationError(f"{context}: unknown parameter key {key!r}")
        field_name, factor = _PARAM_KEYS[key]
        try:
            value = float(raw) * factor
        except ValueError as exc:
            raise ValidationError(f"{context}: non-numeric value for key {key!r}") from exc
        kwargs[field_name] = value
    try:
        params = OptomechParams(**kwargs)
    except ValidationError as exc:
        raise ValidationError(f"{context}: {exc}") from exc
    for field_name in ("mass", "mech_frequency", "mech_damping", "cavity_decay",
                       "cavity_length", "pump_power", "laser_wavelength",
                       "bath_temperature"):
        log.info("%s: %s = %.9e (SI)", context, field_name, getattr(params, field_name))
    log.info("%s: effective detuning = %.9e rad/s", context, params.effective_detuning)
    return params


def load_params(path) -> OptomechParams:
    """Load a flat key-value parameter file."""
    items = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        items[key.strip()] = value.strip()
    return params_from_items(items, context=str(path))


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------

def load_scenario(path) -> ScenarioConfig:
    """Load an INI scenario: [unit1], [unit2], [init], [demon], [integrator],
    [outputs].  Every section is optional; omitted values fall back to the
    reference defaults."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    text = Path(path).read_text()
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ValidationError(f"cannot parse scenario file {path}: {exc}") from exc

    def unit(section: str, other: str) -> OptomechParams:
        if not parser.has_section(section):
            return OptomechParams()
        items = dict(parser.items(section))
        if items.pop("same_as", "").strip() == other:
            base = dict(parser.items(other)) if parser.has_section(other) else {}
            base.pop("same_as", None)
            items = {**base, **items}
        return params_from_items(items, context=f"{path}[{section}]")

    params_pair = (unit("unit1", "unit2"), unit("unit2", "unit1"))

    init_items = dict(parser.items("init")) if parser.has_section("init") else {}
    mech_kind = init_items.get("mech", "thermal").strip()
    mech = MechInitSpec(
        kind=mech_kind,
        temperature=_opt_float(init_items, "mech_temperature_k", path),
        path=init_items.get("mech_file"),
        target_occupation=_opt_float(init_items, "target_occupation", path),
        correlation_strength=_opt_float(init_items, "correlation_strength", path, 1.0),
    )
    opt = OptInitSpec(
        kind=init_items.get("optics", "coherent").strip(),
        squeezing=_opt_float(init_items, "optics_squeezing", path, 0.0),
        phase=_opt_float(init_items, "optics_phase", path, 0.0),
    )

    demon = None
    if parser.has_section("demon"):
        demon_items = dict(parser.items("demon"))
        theta1 = _opt_float(demon_items, "theta1", path)
        theta2 = _opt_float(demon_items, "theta2", path)
        angles = None
        if (theta1 is None) != (theta2 is None):
            raise ValidationError(f"{path}[demon]: theta1 and theta2 must be given together")
        if theta1 is not None:
            angles = (theta1, theta2)
        samples = _opt_float(demon_items, "samples", path)
        seed = _opt_float(demon_items, "seed", path)
        demon = DemonSpec(
            angles=angles,
            samples=None if samples is None else int(samples),
            seed=None if seed is None else int(seed),
        )

    integrator = None
    if parser.has_section("integrator"):
        integ_items = dict(parser.items("integrator"))
        t_end = _opt_float(integ_items, "t_end_s", path)
        if t_end is None:
            gamma = min(p.mech_damping for p in params_pair)
            t_end = 10.0 / gamma
        integrator = IntegratorConfig(
            t_end=t_end,
            dt_max=_opt_float(integ_items, "dt_max_s", path, np.inf),
            rel_tol=_opt_float(integ_items, "rel_tol", path, 1e-7),
            abs_tol=_opt_float(integ_items, "abs_tol", path, 1e-12),
            record_stride=int(_opt_float(integ_items, "record_stride", path, 1)),
        )

    outputs = ScenarioConfig.__dataclass_fields__["outputs"].default
    if parser.has_section("outputs"):
        raw = parser.get("outputs", "measures", fallback="")
        if raw.strip():
            outputs = tuple(name.strip() for name in raw.split(",") if name.strip())

    return ScenarioConfig(
        params_pair=params_pair,
        mech_init=mech,
        opt_init=opt,
        demon=demon,
        integrator=integrator,
        outputs=outputs,
    )


def _opt_float(items: dict, key: str, path, default=None):
    raw = items.get(key)
    if raw is None or str(raw).strip() == "":
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric value for key {key!r}") from exc


# ---------------------------------------------------------------------------
# Delimited output
# ---------------------------------------------------------------------------

def _open_csv(path, digest: str | None):
    fh = open(path, "w", newline="\n")
    fh.write(f"# optodiscord {_tool_version()}\n")
    if digest:
        fh.write(f"# config {digest}\n")
    return fh


def write_trajectory_csv(path, traj: Trajectory, digest: str | None = None) -> None:
    """One row per recorded time; columns are t_s plus the recorded measures."""
    names = [n for n in traj.measures]
    with _open_csv(path, digest) as fh:
        fh.write(",".join(["t_s"] + names) + "\n")
        for k, t in enumerate(traj.times):
            row = [_FMT.format(t)] + [_FMT.format(traj.measures[n][k]) for n in names]
            fh.write(",".join(row) + "\n")


def write_sweep_csv(path, sweep: SweepResult, digest: str | None = None) -> None:
    """Sweep records in delimited form.

    Scalar records become one row per axis point.  Records holding arrays
    (the time-resolved squeezing sweep) are written in long format with one
    row per (axis value, time) pair.
    """
    if not sweep.records:
        raise ValidationError("sweep has no records")
    first = sweep.records[0]
    array_keys = [k for k, v in first.items() if isinstance(v, np.ndarray)]
    digest = digest or sweep.metadata.get("config")
    with _open_csv(path, digest) as fh:
        for key in ("seed", "n"):
            if key in sweep.metadata:
                fh.write(f"# {key} {sweep.metadata[key]}\n")
        if not array_keys:
            names = list(first)
            fh.write(",".join(names) + "\n")
            for rec in sweep.records:
                fh.write(",".join(_format_cell(rec[n]) for n in names) + "\n")
        else:
            # long format: axis value, time, then one column per series
            series = [k for k in array_keys if k != "times_s"]
            fh.write(",".join([sweep.axis_name, "t_s"] + series) + "\n")
            for rec in sweep.records:
                times = rec["times_s"]
                for i, t in enumerate(times):
                    cells = [_format_cell(rec[sweep.axis_name]), _FMT.format(t)]
                    cells += [_FMT.format(rec[name][i]) for name in series]
                    fh.write(",".join(cells) + "\n")


def _format_cell(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return _FMT.format(float(value))
