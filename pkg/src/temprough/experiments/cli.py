"""Command-line entry point.

    temprough <experiment> [--hurst 0.3,0.4] [--lambda 1] [--steps 64,...,4096]
                           [--mc 1000] [--seed 1729] [--out file.csv]
                           [--config file] [--fast]

Experiments: simulate, levy-convergence, milstein-convergence,
signature-features, covariance-check, rho-variation.  Flag values override
config-file values, which override per-experiment defaults; `--fast` drops
the Monte Carlo count to 200 unless `--mc` is given explicitly.
"""

from __future__ import annotations

import argparse
import sys
from typing import Any, Dict, Sequence

from ..errors import TempRoughError
from .config import EXPERIMENTS, build_config, parse_config_file
from . import runner

__all__ = ["main", "build_parser"]

_RUNNERS = {
    "simulate": runner.run_simulate,
    "levy-convergence": runner.run_levy_convergence,
    "milstein-convergence": runner.run_milstein_convergence,
    "signature-features": runner.run_signature_features,
    "covariance-check": runner.run_covariance_check,
    "rho-variation": runner.run_rho_variation,
}


def _float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(part) for part in raw.split(","))


def _int_list(raw: str) -> tuple[int, ...]:
    return tuple(int(part) for part in raw.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="temprough",
        description=(
            "Covariance checks, exact simulation, and convergence experiments "
            "for the rough-path lift of tempered fractional Brownian motion."
        ),
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--hurst", type=_float_list, default=None,
                       help="comma-separated Hurst values in (0,1)")
        p.add_argument("--lambda", dest="lam", type=_float_list, default=None,
                       help="comma-separated tempering rates (> 0)")
        p.add_argument("--steps", "-N", dest="resolutions", type=_int_list,
                       default=None,
                       help="comma-separated step counts (dyadic depths for "
                            "rho-variation)")
        p.add_argument("--mc", dest="n_mc", type=int, default=None,
                       help="Monte Carlo sample count")
        p.add_argument("--seed", type=int, default=None, help="RNG seed")
        p.add_argument("--out", default=None, help="output CSV path")
        p.add_argument("--config", default=None, help="key=value config file")
        p.add_argument("--fast", action="store_const", const=True, default=None,
                       help="reduced Monte Carlo count (200) for quick runs")
        p.add_argument("--horizon", type=float, default=None,
                       help="time horizon T (default 1)")
        if name == "signature-features":
            p.add_argument("--depth", type=int, default=None,
                           help="signature truncation depth (>= 2)")
        if name == "simulate":
            p.add_argument("--dim", type=int, default=None,
                           help="number of independent components")
            p.add_argument("--binary", action="store_const", const=True,
                           default=None,
                           help="write one binary dump instead of CSVs")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    flag_overrides: Dict[str, Any] = {
        key: getattr(args, key)
        for key in ("hurst", "lam", "resolutions", "n_mc", "seed", "out",
                    "fast", "horizon", "depth", "dim", "binary")
        if getattr(args, key, None) is not None
    }
    try:
        file_overrides = parse_config_file(args.config) if args.config else None
        config = build_config(args.experiment, file_overrides, flag_overrides)
        _RUNNERS[args.experiment](config)
    except TempRoughError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
