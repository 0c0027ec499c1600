"""Deterministic CSV output for experiment results.

Every file starts with a `#`-commented echo of the full configuration (one
`# key=value` line per field, in field order), then the column header, then
data rows.  Floats are rendered with `repr` so equal configs give
byte-identical files; newline is always "\\n".
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .config import ExperimentConfig

__all__ = ["render_value", "write_csv"]


def render_value(value) -> str:
    """Render one CSV cell: ints plain, floats via repr, strings as-is."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(
    path: str,
    config: ExperimentConfig,
    header: str,
    rows: Iterable[Sequence],
    footer: Sequence[str] = (),
) -> None:
    """Write config echo + header + rows (+ optional `#` footer lines)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for key, rendered in config.echo_items():
            fh.write(f"# {key}={rendered}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(render_value(v) for v in row) + "\n")
        for line in footer:
            fh.write(line + "\n")
