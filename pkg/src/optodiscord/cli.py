"""Command-line frontend.

Subcommands dispatch to the library, write delimited output (with a
configuration digest and tool version in comment lines) and, with
``--plot``, render an SVG figure next to it.  Exit codes: 0 success,
2 validation error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import max_measure_over_window, steady_state
from .errors import NumericalError, ValidationError
from .gaussian import CovarianceMatrix, gaussian_discord, log_negativity
from .io import (
    load_scenario,
    read_matrix,
    write_matrix,
    write_sweep_csv,
    write_trajectory_csv,
)
from .protocol import (
    ScenarioConfig,
    demon_sample,
    run_activation,
    scenario_fingerprint,
    squeezing_sweep,
    temperature_sweep,
    _composed_system,
    _measure_series,
)

_FMT = "{:.17g}"


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optodiscord",
        description="Covariance-level simulator of two dissipative "
                    "optomechanical cavities with entanglement and "
                    "Gaussian-discord diagnostics.",
    )
    parser.add_argument("--version", action="version", version=f"optodiscord {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_cmd(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="scenario file (INI); defaults used when omitted")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--plot", action="store_true", help="also write an SVG next to the CSV")
        return p

    scenario_cmd("steady-state", "solve the composed steady state and report its measures")
    scenario_cmd("evolve", "integrate the configured scenario (demon rotation ignored)")
    scenario_cmd("activate", "run the full activation protocol from the scenario")

    p = scenario_cmd("sweep-temperature", "peak mirror-field entanglement vs bath temperature")
    p.add_argument("--temperatures", help="comma-separated list of bath temperatures in K")
    p.add_argument("--t-min", type=float, default=1e-6)
    p.add_argument("--t-max", type=float, default=0.4)
    p.add_argument("--points", type=int, default=25, help="log-spaced point count")

    p = scenario_cmd("sweep-squeezing", "mirror-field entanglement over a (time, squeezing) grid")
    p.add_argument("--squeezings", help="comma-separated list of squeezing parameters")
    p.add_argument("--r-max", type=float, default=2.0)
    p.add_argument("--points", type=int, default=21)

    p = scenario_cmd("demon-sample", "distribution of activation under random register rotations")
    p.add_argument("--seed", type=int, help="random seed (required unless set in the config)")
    p.add_argument("-n", "--samples", type=int, help="sample count")

    for name, help_text in (
        ("discord", "Gaussian discord of a two-mode matrix file"),
        ("logneg", "logarithmic negativity of a matrix file"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--cm", required=True, help="covariance-matrix file")
        p.add_argument("--force", action="store_true",
                       help="accept marginally unphysical input (logged)")
        if name == "discord":
            p.add_argument("--measured-mode", type=int, default=2, choices=(1, 2))
        else:
            p.add_argument("--modes", default="2",
                           help="comma-separated partition mode indices (1-based)")
    return parser


def _load_cfg(args) -> ScenarioConfig:
    if getattr(args, "config", None):
        return load_scenario(args.config)
    return ScenarioConfig()


def _out_path(args, default_name: str) -> Path:
    return Path(args.out) if args.out else Path(default_name)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"malformed numeric list: {text!r}") from exc


def _cmd_steady_state(args) -> int:
    cfg = _load_cfg(args)
    drift, diffusion = _composed_system(cfg)
    v_ss = steady_state(drift, diffusion)
    from .dynamics import Trajectory
    probe = Trajectory(times=np.array([0.0]), states=[v_ss])
    series = _measure_series(probe, cfg.outputs)
    for name in cfg.outputs:
        print(f"{name} = " + _FMT.format(series[name][0]))
    if args.out:
        write_matrix(args.out, CovarianceMatrix(v_ss))
        print(f"steady-state matrix written to {args.out}")
    return 0


def _run_scenario(args, keep_demon: bool) -> int:
    cfg = _load_cfg(args)
    if not keep_demon and cfg.demon is not None:
        cfg = replace(cfg, demon=None)
    traj = run_activation(cfg)
    out = _out_path(args, "trajectory.csv")
    write_trajectory_csv(out, traj, scenario_fingerprint(cfg))
    e_max, t_star = max_measure_over_window(
        traj, "E_mirrors_vs_fields", partition=(3, 4)
    )
    print(f"recorded {len(traj.times)} states to {out}")
    print(f"peak mirrors-fields log-negativity {_FMT.format(e_max)} at t = {t_star:.6e} s")
    if args.plot:
        from .plots import save_trajectory_plot
        save_trajectory_plot(out.with_suffix(".svg"), traj)
        print(f"figure written to {out.with_suffix('.svg')}")
    return 0


def _cmd_sweep_temperature(args) -> int:
    cfg = _load_cfg(args)
    if args.temperatures:
        temps = _float_list(args.temperatures)
    else:
        temps = list(np.geomspace(args.t_min, args.t_max, args.points))
    sweep = temperature_sweep(cfg, temps)
    out = _out_path(args, "temperature_sweep.csv")
    write_sweep_csv(out, sweep)
    print(f"{len(temps)} temperatures written to {out}")
    if args.plot:
        from .plots import save_temperature_plot
        save_temperature_plot(out.with_suffix(".svg"), sweep)
        print(f"figure written to {out.with_suffix('.svg')}")
    return 0


def _cmd_sweep_squeezing(args) -> int:
    cfg = _load_cfg(args)
    if args.squeezings:
        rs = _float_list(args.squeezings)
    else:
        rs = list(np.linspace(0.0, args.r_max, args.points))
    sweep = squeezing_sweep(cfg, rs)
    out = _out_path(args, "squeezing_sweep.csv")
    write_sweep_csv(out, sweep)
    print(f"{len(rs)} squeezing values written to {out}")
    if args.plot:
        from .plots import save_squeezing_heatmap
        save_squeezing_heatmap(out.with_suffix(".svg"), sweep)
        print(f"figure written to {out.with_suffix('.svg')}")
    return 0


def _cmd_demon_sample(args) -> int:
    cfg = _load_cfg(args)
    sweep = demon_sample(cfg, n=args.samples, seed=args.seed)
    out = _out_path(args, "demon_sample.csv")
    write_sweep_csv(out, sweep)
    e_vals = sweep.column("E_max")
    print(f"{len(e_vals)} samples written to {out}")
    print(f"min peak entanglement {_FMT.format(e_vals.min())}, "
          f"max {_FMT.format(e_vals.max())}")
    if args.plot:
        from .plots import save_demon_histogram
        save_demon_histogram(out.with_suffix(".svg"), sweep)
        print(f"figure written to {out.with_suffix('.svg')}")
    return 0


def _cmd_discord(args) -> int:
    cm = read_matrix(args.cm, force=args.force)
    print(_FMT.format(gaussian_discord(cm, measured_mode=args.measured_mode)))
    return 0


def _cmd_logneg(args) -> int:
    cm = read_matrix(args.cm, force=args.force)
    modes = [int(x) for x in args.modes.split(",") if x.strip()]
    print(_FMT.format(log_negativity(cm, modes)))
    return 0


_DISPATCH = {
    "steady-state": _cmd_steady_state,
    "evolve": lambda args: _run_scenario(args, keep_demon=False),
    "activate": lambda args: _run_scenario(args, keep_demon=True),
    "sweep-temperature": _cmd_sweep_temperature,
    "sweep-squeezing": _cmd_sweep_squeezing,
    "demon-sample": _cmd_demon_sample,
    "discord": _cmd_discord,
    "logneg": _cmd_logneg,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = _parser().parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
