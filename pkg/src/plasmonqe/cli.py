"""Command-line interface: one subcommand per experiment.

Exit codes: 0 success, 2 configuration error, 3 numerical-convergence error.
``PLASMON_JOBS`` sets the default for ``--jobs``.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import experiments
from .bound_state import BracketError
from .config import ConfigError, RunConfig, apply_overrides, parse_config
from .dynamics import TimestepError
from .kernel import KernelInvariantError
from .quadrature import ConvergenceError, DivergenceError
from .spectral import TabulationError

_NUMERICAL_ERRORS = (
    ConvergenceError,
    DivergenceError,
    TabulationError,
    KernelInvariantError,
    TimestepError,
    BracketError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _parse_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --values list {text!r}: {exc}") from None


def _default_jobs() -> int:
    env = os.environ.get("PLASMON_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"PLASMON_JOBS must be an integer, got {env!r}") from None
    return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="path to a key = value config file")
    common.add_argument("--out", type=Path, help="output directory (default from config)")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config key (repeatable)",
    )
    common.add_argument("--jobs", type=int, default=None, help="parallel workers for sweeps")
    common.add_argument(
        "--no-free-term",
        action="store_true",
        help="drop the free radiative background from the exact spectral density",
    )

    parser = argparse.ArgumentParser(
        prog="plasmonqe",
        description="emitter-SPP dissipative dynamics, bound states and pseudomode comparison",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectral", parents=[common], help="tabulate the spectral density")
    sp.add_argument(
        "--which",
        choices=("exact", "quasistatic", "lorentzian"),
        default="exact",
        help="which spectral density to tabulate",
    )
    sub.add_parser("kernel", parents=[common], help="tabulate the memory kernel")
    sub.add_parser("evolve", parents=[common], help="population evolution P_e(t)")
    p = sub.add_parser("bound-state", parents=[common], help="bound-state energy and weight")
    p.add_argument("--values", type=str, help="comma-separated distances in nm")
    p = sub.add_parser("spectrum", parents=[common], help="energy spectrum vs distance")
    p.add_argument("--values", type=str, help="comma-separated distances in nm")
    sub.add_parser("rates", parents=[common], help="time-dependent decay rate")
    sub.add_parser("compare", parents=[common], help="exact vs pseudomode dynamics")
    p = sub.add_parser("sweep-z", parents=[common], help="steady population vs distance")
    p.add_argument("--values", type=str, help="comma-separated distances in nm")
    p = sub.add_parser("sweep-eps", parents=[common], help="max trapped population vs eps_d")
    p.add_argument("--values", type=str, help="comma-separated permittivities")
    return parser


def _resolve_config(args) -> RunConfig:
    if args.config is not None:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        cfg = parse_config(text)
    else:
        cfg = RunConfig().validate()
    if args.overrides:
        cfg = apply_overrides(cfg, args.overrides)
    if args.no_free_term:
        cfg = apply_overrides(cfg, ["include_free_term=false"])
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        jobs = args.jobs if args.jobs is not None else _default_jobs()
        if jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        out = args.out if args.out is not None else Path(cfg.out_dir)
        values = None
        if getattr(args, "values", None):
            values = _parse_values(args.values)
        if args.command == "spectral":
            experiments.run_spectral(cfg, out, jobs, which=args.which)
        elif args.command == "kernel":
            experiments.run_kernel(cfg, out, jobs)
        elif args.command == "evolve":
            result = experiments.run_evolution(cfg, out, jobs)
            print(f"final P_e = {result.final_pe:.6g}, late-window mean = {result.late_mean_pe:.6g}")
        elif args.command == "bound-state":
            experiments.run_bound_state(cfg, out, jobs, values=values)
        elif args.command == "spectrum":
            experiments.run_spectrum(cfg, out, jobs, values=values)
        elif args.command == "rates":
            experiments.run_rates(cfg, out, jobs)
        elif args.command == "compare":
            result = experiments.run_comparison(cfg, out, jobs)
            print(
                f"bound_state={result.bound_state_exists} "
                f"max_abs_diff={result.max_abs_diff:.6g} late_diff={result.late_diff:.6g}"
            )
        elif args.command == "sweep-z":
            experiments.run_steady_sweep(cfg, out, jobs, values=values)
        elif args.command == "sweep-eps":
            experiments.run_eps_sweep(cfg, out, jobs, values=values)
        else:  # pragma: no cover
            raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
