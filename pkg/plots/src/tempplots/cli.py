"""Command-line entry point.

    temprough-plot <figure-id> --in <csv> [--moments <csv>]
                   [--trajectory <csv>] --out <png> [--dpi 150]

Figure ids: `levy` (refinement-error convergence, dashed −2H references),
`milstein` (strong-error convergence, dashed −H references, plus a
trajectory overlay panel when the sidecar is present), `signature`
((S1, S2) scatter with 95% confidence ellipses).

For `milstein` the `<stem>.trajectory.csv` sidecar written by the
experiment CLI is picked up automatically when it sits next to the input
CSV; for `signature` the `<stem>.moments.csv` sidecar likewise.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from .figures import (
    FIGURE_DPI,
    convergence_figure,
    milstein_figure,
    save_figure,
    signature_figure,
)
from .io import PlotDataError, read_table

__all__ = ["main", "build_parser"]

FIGURES = ("levy", "milstein", "signature")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="temprough-plot",
        description="Render figures from the experiment CSVs.",
    )
    parser.add_argument("figure", choices=FIGURES, help="which figure to render")
    parser.add_argument("--in", dest="input", required=True,
                        help="input experiment CSV")
    parser.add_argument("--moments", default=None,
                        help="signature moments sidecar CSV "
                             "(default: <stem>.moments.csv if present)")
    parser.add_argument("--trajectory", default=None,
                        help="milstein trajectory sidecar CSV "
                             "(default: <stem>.trajectory.csv if present)")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--dpi", type=int, default=FIGURE_DPI,
                        help=f"output resolution (default {FIGURE_DPI})")
    return parser


def _sidecar(input_path: str, tag: str) -> str | None:
    stem, ext = os.path.splitext(input_path)
    candidate = f"{stem}.{tag}{ext or '.csv'}"
    return candidate if os.path.exists(candidate) else None


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        table = read_table(args.input)
        if args.figure == "levy":
            fig = convergence_figure(table)
        elif args.figure == "milstein":
            trajectory_path = args.trajectory or _sidecar(args.input, "trajectory")
            trajectory = read_table(trajectory_path) if trajectory_path else None
            fig = milstein_figure(table, trajectory)
        else:
            moments_path = args.moments or _sidecar(args.input, "moments")
            moments = read_table(moments_path) if moments_path else None
            fig = signature_figure(table, moments)
        save_figure(fig, args.out, dpi=args.dpi)
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
