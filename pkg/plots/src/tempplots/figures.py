"""The three figure builders: convergence, trajectory overlay, signature scatter.

All builders return a plain `matplotlib.figure.Figure` (no pyplot state),
sized and styled identically on every call so that saving with fixed
metadata yields byte-identical images for identical inputs.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Ellipse

from .io import PlotDataError, Table, require_columns

__all__ = [
    "FIGURE_DPI",
    "CHI2_2_95",
    "convergence_figure",
    "milstein_figure",
    "signature_figure",
    "ellipse_parameters",
    "save_figure",
]

FIGURE_DPI = 150
_SINGLE = (6.4, 4.8)
_DOUBLE = (11.0, 4.5)

# 0.95 quantile of the chi-squared distribution with 2 degrees of freedom;
# the Mahalanobis radius of a 95% Gaussian confidence ellipse
CHI2_2_95 = 5.991464547107979

_COLORS = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _groups(table: Table) -> list:
    """Sorted unique (H, lambda) pairs with their row masks."""
    h = table.column("H")
    lam = table.column("lambda")
    pairs = sorted(set(zip(h.tolist(), lam.tolist())))
    return [(hv, lv, (h == hv) & (lam == lv)) for hv, lv in pairs]


def _color_for(values: list):
    """Stable color per sorted unique value."""
    order = sorted(set(values))
    return {v: _COLORS[i % len(_COLORS)] for i, v in enumerate(order)}


# ---------------------------------------------------------------------------
# Log-log convergence figures
# ---------------------------------------------------------------------------

def _draw_convergence(ax, table: Table, x_column: str, slope_factor: float) -> None:
    """Data markers, OLS fit, dashed reference slope, ±1 stderr band.

    ``slope_factor`` maps H to the theoretical slope (-2 for the area
    refinement error, -1 for the strong scheme error).  The dashed
    reference is anchored at each group's first point.
    """
    require_columns(table, ("H", "lambda", x_column, "error"), "convergence plot")
    has_stderr = "stderr" in table.columns
    if not has_stderr:
        warnings.warn(
            f"{table.path}: no stderr column; error band omitted",
            UserWarning,
            stacklevel=3,
        )
    colors = _color_for([h for h, _, _ in _groups(table)])
    for h, lam, mask in _groups(table):
        x = table.column(x_column)[mask]
        err = table.column("error")[mask]
        order = np.argsort(x)
        x, err = x[order], err[order]
        if np.any(x <= 0.0) or np.any(err <= 0.0):
            raise PlotDataError(
                f"{table.path}: log-log plot needs positive {x_column} and error"
            )
        color = colors[h]
        ax.plot(x, err, "o", color=color, markersize=4,
                label=f"H={h:g}, λ={lam:g}")
        slope, intercept = np.polyfit(np.log2(x), np.log2(err), 1)
        ax.plot(x, 2.0 ** (intercept + slope * np.log2(x)),
                "-", color=color, linewidth=1.0, alpha=0.8)
        reference = slope_factor * h
        ax.plot(x, err[0] * (x / x[0]) ** reference, "--", color=color,
                linewidth=1.0, alpha=0.9,
                gid=f"reference-slope:{reference:g}")
        if has_stderr:
            stderr = table.column("stderr")[mask][order]
            lower = np.maximum(err - stderr, 1e-300)
            ax.fill_between(x, lower, err + stderr, color=color, alpha=0.2,
                            linewidth=0.0)
    ax.set_xscale("log", base=2)
    ax.set_yscale("log", base=2)
    ax.set_xlabel(x_column)
    ax.set_ylabel("error")
    ax.legend(fontsize=8)
    ax.grid(True, which="major", alpha=0.3)


def convergence_figure(table: Table) -> Figure:
    """Refinement-error convergence: e(N) vs N, dashed references at -2H."""
    fig = Figure(figsize=_SINGLE)
    ax = fig.add_subplot(111)
    _draw_convergence(ax, table, "N", slope_factor=-2.0)
    ax.set_title("Lévy-area refinement error (dashed: slope −2H)")
    return fig


def milstein_figure(table: Table, trajectory: Table | None = None) -> Figure:
    """Strong-error convergence (dashed references at -H), optionally with
    an exact-vs-scheme sample trajectory overlay in a second panel."""
    if trajectory is None:
        fig = Figure(figsize=_SINGLE)
        ax = fig.add_subplot(111)
        _draw_convergence(ax, table, "n", slope_factor=-1.0)
        ax.set_title("Milstein strong error (dashed: slope −H)")
        return fig

    require_columns(trajectory, ("t", "driver", "exact", "milstein"),
                    "trajectory overlay")
    fig = Figure(figsize=_DOUBLE)
    ax_left = fig.add_subplot(121)
    _draw_convergence(ax_left, table, "n", slope_factor=-1.0)
    ax_left.set_title("Milstein strong error (dashed: slope −H)")

    ax_right = fig.add_subplot(122)
    t = trajectory.column("t")
    ax_right.plot(t, trajectory.column("driver"), "-", color="#999999",
                  linewidth=0.8, label="driver B(t)")
    ax_right.plot(t, trajectory.column("exact"), "-", color="#1f77b4",
                  linewidth=1.4, label="exact exp(B(t))")
    ax_right.plot(t, trajectory.column("milstein"), "--", color="#d62728",
                  linewidth=1.2, label="Milstein (100 steps)")
    ax_right.set_xlabel("t")
    ax_right.set_ylabel("Y(t)")
    ax_right.set_title("Sample trajectory")
    ax_right.legend(fontsize=8)
    ax_right.grid(True, alpha=0.3)
    return fig


# ---------------------------------------------------------------------------
# Signature scatter with confidence ellipses
# ---------------------------------------------------------------------------

def ellipse_parameters(mean, cov, quantile: float = CHI2_2_95):
    """(center, width, height, angle_degrees) of the Gaussian confidence
    ellipse {x : (x-mean)^T cov^{-1} (x-mean) <= quantile}."""
    mean = np.asarray(mean, dtype=float).reshape(2)
    cov = np.asarray(cov, dtype=float).reshape(2, 2)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    if np.any(eigenvalues <= 0.0):
        raise PlotDataError(
            f"covariance for a confidence ellipse must be positive definite, "
            f"got eigenvalues {eigenvalues}"
        )
    # eigh returns ascending eigenvalues; major axis last
    width = 2.0 * math.sqrt(quantile * eigenvalues[1])
    height = 2.0 * math.sqrt(quantile * eigenvalues[0])
    angle = math.degrees(math.atan2(eigenvectors[1, 1], eigenvectors[0, 1]))
    return mean, width, height, angle


def _moment_rows(table: Table, moments: Table | None) -> list:
    """(H, lambda, mean, cov) per group, from the sidecar when given,
    otherwise from the scatter points themselves."""
    out = []
    if moments is not None:
        require_columns(
            moments,
            ("H", "lambda", "mean_s1", "mean_s2", "cov11", "cov12", "cov22"),
            "signature moments sidecar",
        )
        for k in range(moments.n_rows):
            mean = np.array([moments.column("mean_s1")[k],
                             moments.column("mean_s2")[k]])
            cov = np.array([
                [moments.column("cov11")[k], moments.column("cov12")[k]],
                [moments.column("cov12")[k], moments.column("cov22")[k]],
            ])
            out.append((moments.column("H")[k], moments.column("lambda")[k],
                        mean, cov))
        return out
    for h, lam, mask in _groups(table):
        points = np.column_stack([table.column("S1")[mask],
                                  table.column("S2")[mask]])
        if points.shape[0] < 3:
            raise PlotDataError(
                f"{table.path}: group H={h:g} lambda={lam:g} has "
                f"{points.shape[0]} points; need >= 3 for an ellipse"
            )
        out.append((h, lam, points.mean(axis=0), np.cov(points, rowvar=False)))
    return out


def signature_figure(table: Table, moments: Table | None = None) -> Figure:
    """(S1, S2) scatter colored by H with a 95% ellipse per (H, lambda)."""
    require_columns(table, ("H", "lambda", "S1", "S2"), "signature scatter")
    fig = Figure(figsize=_SINGLE)
    ax = fig.add_subplot(111)
    colors = _color_for([h for h, _, _ in _groups(table)])
    for h, lam, mask in _groups(table):
        ax.plot(table.column("S1")[mask], table.column("S2")[mask], "o",
                color=colors[h], markersize=2.5, alpha=0.55,
                label=f"H={h:g}, λ={lam:g}")
    for h, lam, mean, cov in _moment_rows(table, moments):
        center, width, height, angle = ellipse_parameters(mean, cov)
        ax.add_patch(Ellipse(center, width, height, angle=angle,
                             facecolor="none", edgecolor=colors[h],
                             linewidth=1.4, gid=f"ellipse:H={h:g}"))
    ax.set_xlabel("S1 = B(T)")
    ax.set_ylabel("S2 = B(T)²/2")
    ax.set_title("Signature features with 95% ellipses")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    return fig


def save_figure(fig: Figure, out: str, dpi: int = FIGURE_DPI) -> None:
    """Write a PNG with fixed metadata (no timestamps): deterministic bytes."""
    fig.savefig(out, dpi=dpi, format="png", metadata={"Software": "tempplots"})
