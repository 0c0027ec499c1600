"""Reading the experiment CSVs: config echo comments, header, numeric columns.

The producing CLI writes files of the form::

    # experiment=levy-convergence
    # hurst=0.3,0.4
    ...
    H,lambda,N,error,stderr
    0.3,1.0,64,0.163,0.0012
    ...
    # slope hurst=0.3 lambda=1.0: -0.09 stderr=0.004

Leading `# key=value` lines become the ``config`` dict; trailing comment
lines (slope footers) are kept verbatim in ``footers``; everything else
is parsed as float columns keyed by the header names.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["PlotDataError", "Table", "read_table", "require_columns"]


class PlotDataError(ValueError):
    """A CSV does not match the schema the figure needs."""


@dataclass(frozen=True)
class Table:
    """One parsed CSV: config echo, column arrays, free-form comment lines."""

    path: str
    config: dict = field(default_factory=dict)
    columns: dict = field(default_factory=dict)
    footers: tuple = ()

    @property
    def n_rows(self) -> int:
        if not self.columns:
            return 0
        return next(iter(self.columns.values())).size

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise PlotDataError(
                f"{self.path}: missing column {name!r}; have {sorted(self.columns)}"
            )
        return self.columns[name]


def read_table(path: str) -> Table:
    """Parse one experiment CSV into a `Table`; strict on malformed rows."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise PlotDataError(f"cannot read {path}: {exc}") from exc

    config: dict = {}
    footers: list = []
    header: list | None = None
    rows: list = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if header is None and "=" in body and " " not in body.split("=", 1)[0]:
                key, _, value = body.partition("=")
                config[key.strip()] = value.strip()
            else:
                footers.append(line)
            continue
        if header is None:
            header = [name.strip() for name in line.split(",")]
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise PlotDataError(
                f"{path}:{lineno}: expected {len(header)} fields "
                f"({','.join(header)}), got {len(parts)}"
            )
        try:
            rows.append([float(part) for part in parts])
        except ValueError as exc:
            raise PlotDataError(f"{path}:{lineno}: non-numeric field: {exc}") from exc

    if header is None:
        raise PlotDataError(f"{path}: no header line found")
    if not rows:
        raise PlotDataError(f"{path}: no data rows found")
    data = np.asarray(rows, dtype=float)
    columns = {name: data[:, k] for k, name in enumerate(header)}
    return Table(path=path, config=config, columns=columns, footers=tuple(footers))


def require_columns(table: Table, names: tuple, context: str) -> None:
    missing = [name for name in names if name not in table.columns]
    if missing:
        raise PlotDataError(
            f"{table.path}: {context} needs columns {names}, missing {missing}; "
            f"have {sorted(table.columns)}"
        )
