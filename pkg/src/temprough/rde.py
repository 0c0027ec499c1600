"""Milstein-type solving of RDEs driven by a level-2 rough path.

The scheme advances, per grid interval,

    Y_{k+1} = Y_k + f(Y_k) dB_k + Df(Y_k) f(Y_k) BB_k,

with dB_k the driver increment and BB_k the adjacent level-2 tensor of the
lift.  Index convention (matching the lift): the correction term is

    sum_{a,b,j} (d f^i_b / d y^j) f^j_a BB_k[a, b].

For the scalar linear equation dY = Y dB in one dimension the adjacent
tensors are (1/2)(dB_k)^2, the step becomes Y (1 + dB + dB^2/2), and the
scheme converges pathwise to exp(B(T)), the exact solution for the
geometric (piecewise-linear limit) lift.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DivergenceError, DomainError
from .params import ModelParams, RngSpec
from .reports import ConvergenceReport, fit_loglog_slope, rms_and_stderr
from .roughpath import RoughPathLift, lift_piecewise_linear
from .simulate import SamplePath, simulate_paths

__all__ = [
    "VectorField",
    "linear_scalar_field",
    "jacobian_check",
    "milstein_solve",
    "exact_scalar_linear",
    "strong_error",
    "YoungRoughReport",
    "young_vs_rough_compare",
]


# ---------------------------------------------------------------------------
# Vector fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VectorField:
    """A driving vector field y -> f(y) with its Jacobian.

    ``f(y)`` returns an (m, dim) matrix; ``df(y)`` returns the (m, dim, m)
    tensor with df(y)[i, a, j] = d f[i, a] / d y[j].  ``df`` must be the
    true Jacobian of ``f`` (checked by finite differences); ``smoothness``
    is informational metadata (e.g. "C3_bounded").
    """

    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]
    dim_state: int
    dim_noise: int
    smoothness: str = "unspecified"


def linear_scalar_field() -> VectorField:
    """The scalar linear field f(y) = y for dY = Y dB in one dimension."""
    return VectorField(
        f=lambda y: y.reshape(1, 1),
        df=lambda y: np.ones((1, 1, 1)),
        dim_state=1,
        dim_noise=1,
        smoothness="linear",
    )


def jacobian_check(
    vf: VectorField,
    states: Sequence[np.ndarray],
    step: float = 1e-6,
    rtol: float = 1e-5,
) -> float:
    """Largest relative error between ``vf.df`` and central finite differences.

    Raises `DomainError` when the worst relative error exceeds ``rtol``.
    """
    worst = 0.0
    for y in states:
        y = np.asarray(y, dtype=float)
        analytic = np.asarray(vf.df(y), dtype=float)
        numeric = np.empty_like(analytic)
        for j in range(vf.dim_state):
            bump = np.zeros_like(y)
            bump[j] = step
            numeric[:, :, j] = (vf.f(y + bump) - vf.f(y - bump)) / (2.0 * step)
        scale = max(1.0, float(np.max(np.abs(analytic))))
        worst = max(worst, float(np.max(np.abs(numeric - analytic))) / scale)
    if worst > rtol:
        raise DomainError(
            f"df is not the Jacobian of f: finite-difference mismatch {worst:.3g} "
            f"exceeds {rtol:.3g}"
        )
    return worst


# ---------------------------------------------------------------------------
# The Milstein scheme
# ---------------------------------------------------------------------------

def milstein_solve(
    vf: VectorField,
    y0: np.ndarray,
    lift: RoughPathLift,
    check_jacobian: bool = True,
) -> np.ndarray:
    """Solve dY = f(Y) dB along ``lift``; returns (N+1, m) states.

    Deterministic in its inputs.  A non-finite state raises
    `DivergenceError` carrying the offending step index.
    """
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    if y0.shape != (vf.dim_state,):
        raise DomainError(f"y0 shape {y0.shape} does not match state dim {vf.dim_state}")
    if lift.dim != vf.dim_noise:
        raise DomainError(
            f"lift dim {lift.dim} does not match vector field noise dim {vf.dim_noise}"
        )
    if check_jacobian:
        jacobian_check(vf, [y0])

    increments = np.diff(lift.path.values, axis=0)
    tensors = lift.adjacent_tensors()
    n_steps = increments.shape[0]
    out = np.empty((n_steps + 1, vf.dim_state))
    out[0] = y0
    y = y0
    for k in range(n_steps):
        fy = np.asarray(vf.f(y), dtype=float)
        dfy = np.asarray(vf.df(y), dtype=float)
        y = (
            y
            + fy @ increments[k]
            + np.einsum("ibj,ja,ab->i", dfy, fy, tensors[k])
        )
        if not np.all(np.isfinite(y)):
            raise DivergenceError(
                f"Milstein state became non-finite at step {k + 1} of {n_steps}",
                step=k + 1,
            )
        out[k + 1] = y
    return out


def exact_scalar_linear(path: SamplePath) -> float:
    """exp(B(T) - B(0)): the exact terminal value of dY = Y dB, Y(0) = 1.

    This is the limit of the Milstein scheme for the geometric lift (the
    per-step factor 1 + dB + dB^2/2 is the truncated exponential).
    Requires a one-dimensional path.
    """
    if path.params.dim != 1:
        raise DomainError(
            f"the scalar linear oracle needs dim=1 paths, got dim={path.params.dim}"
        )
    return float(np.exp(path.values[-1, 0] - path.values[0, 0]))


# ---------------------------------------------------------------------------
# Strong error measurement
# ---------------------------------------------------------------------------

def strong_error(
    params: ModelParams,
    vf: VectorField,
    y0: np.ndarray,
    resolutions: Sequence[int],
    n_mc: int,
    rng: RngSpec,
    exact: Callable[[SamplePath], float] | None = None,
) -> ConvergenceReport:
    """Monte Carlo L2 error of the Milstein scheme per resolution, with slope.

    Resolutions must be nested powers of two.  The reference per path is
    ``exact(fine path)`` when an exact terminal functional is supplied
    (e.g. `exact_scalar_linear` for the linear equation), otherwise the
    Milstein solution at 8x the finest resolution; either way all coarser
    drivers are coarsenings of the same fine path (coupled comparison).
    """
    resolutions = list(resolutions)
    if not resolutions or sorted(set(resolutions)) != resolutions:
        raise DomainError("resolutions must be strictly increasing and nonempty")
    for n in resolutions:
        if n < 1 or (n & (n - 1)) != 0:
            raise DomainError(f"resolutions must be powers of two, got {n}")
    if n_mc < 2:
        raise DomainError(f"n_mc must be >= 2, got {n_mc}")
    params.require_lift()
    jacobian_check(vf, [np.atleast_1d(np.asarray(y0, dtype=float))])

    n_fine = max(resolutions) if exact is not None else 8 * max(resolutions)
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    sq = np.empty((n_mc, len(resolutions)))
    result = simulate_paths(params, n_fine, n_mc, rng)
    for p, path in enumerate(result):
        if exact is not None:
            reference = float(exact(path))
        else:
            fine_terminal = milstein_solve(vf, y0, lift_piecewise_linear(path), False)[-1]
            reference = fine_terminal
        for idx, n in enumerate(resolutions):
            coarse = path.coarsen(n_fine // n)
            terminal = milstein_solve(vf, y0, lift_piecewise_linear(coarse), False)[-1]
            sq[p, idx] = float(np.sum((terminal - reference) ** 2))
    errors, stderrs = zip(*(rms_and_stderr(sq[:, k]) for k in range(sq.shape[1])))
    slope, slope_stderr = fit_loglog_slope(resolutions, errors)
    return ConvergenceReport(
        resolutions=tuple(resolutions),
        errors=tuple(errors),
        stderrs=tuple(stderrs),
        slope=slope,
        slope_stderr=slope_stderr,
        n_mc=n_mc,
        seed=rng.seed,
        stream=rng.stream,
    )


# ---------------------------------------------------------------------------
# Young vs rough integration (H > 1/2)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class YoungRoughReport:
    """Per-resolution gaps between left-point (Young) and compensated sums.

    Both Riemann sums approximate the matrix integral of B (x) dB.  Their
    difference is the sum of adjacent level-2 tensors: symmetric, with the
    cross-component content in the off-diagonal entries and the running
    half quadratic variation (the compensator) on the diagonal.  For
    H > 1/2 both parts vanish as the grid refines, the diagonal at the
    slower rate N^{1-2H}.
    """

    resolutions: tuple[int, ...]
    offdiag_gap_rms: tuple[float, ...]  # cross-component entries, rms per entry
    diag_gap_mean: tuple[float, ...]  # mean |diagonal| gap per entry
    total_gap_rms: tuple[float, ...]  # full Frobenius norm, rms over paths
    offdiag_monotone: bool
    total_monotone: bool
    n_mc: int


def young_vs_rough_compare(
    params: ModelParams,
    integrand,
    resolutions: Sequence[int],
    n_mc: int,
    rng: RngSpec,
) -> YoungRoughReport:
    """Compare Young (left-point) and rough (compensated) sums of X against B.

    ``integrand`` selects X in the matrix integral of X (x) dB: the string
    ``"path"`` takes X = B (Gubinelli derivative = identity, so the
    compensated sum adds the level-2 tensors), while a length-dim vector
    takes X constant (derivative zero, so both sums coincide exactly and
    every reported gap is zero).  Requires hurst > 1/2 (the Young side is
    undefined at or below 1/2); resolutions must be nested powers of two.
    """
    if params.hurst <= 0.5:
        raise DomainError(
            f"Young integration needs hurst > 1/2, got {params.hurst}"
        )
    constant: np.ndarray | None = None
    if not (isinstance(integrand, str) and integrand == "path"):
        try:
            constant = np.asarray(integrand, dtype=float).reshape(params.dim)
        except (TypeError, ValueError) as exc:
            raise DomainError(
                f"integrand must be 'path' or a length-{params.dim} constant "
                f"vector, got {integrand!r}"
            ) from exc
    resolutions = list(resolutions)
    if not resolutions or sorted(set(resolutions)) != resolutions:
        raise DomainError("resolutions must be strictly increasing and nonempty")
    for n in resolutions:
        if n < 1 or (n & (n - 1)) != 0:
            raise DomainError(f"resolutions must be powers of two, got {n}")
    if n_mc < 2:
        raise DomainError(f"n_mc must be >= 2, got {n_mc}")

    dim = params.dim
    off_mask = ~np.eye(dim, dtype=bool)
    n_fine = max(resolutions)
    result = simulate_paths(params, n_fine, n_mc, rng)
    off_sq = np.zeros((n_mc, len(resolutions)))
    diag_abs = np.zeros((n_mc, len(resolutions)))
    total_sq = np.zeros((n_mc, len(resolutions)))
    for p, path in enumerate(result):
        for idx, n in enumerate(resolutions):
            coarse = path.coarsen(n_fine // n)
            if constant is not None:
                # zero Gubinelli derivative: the rough sum is the Young sum
                # plus an exactly-zero level-2 correction
                db = np.diff(coarse.values, axis=0)
                young = np.einsum("a,kb->ab", constant, db)
                rough = young + np.zeros_like(young)
                gap = rough - young
            else:
                lift = lift_piecewise_linear(coarse)
                # gap = rough - young = sum of adjacent level-2 tensors
                gap = lift.adjacent_tensors().sum(axis=0)
            off = gap[off_mask]
            off_sq[p, idx] = float(np.mean(off * off)) if off.size else 0.0
            diag_abs[p, idx] = float(np.mean(np.abs(np.diag(gap))))
            total_sq[p, idx] = float(np.sum(gap * gap))
    offdiag_rms = tuple(float(np.sqrt(off_sq[:, k].mean())) for k in range(len(resolutions)))
    diag_mean = tuple(float(diag_abs[:, k].mean()) for k in range(len(resolutions)))
    total_rms = tuple(float(np.sqrt(total_sq[:, k].mean())) for k in range(len(resolutions)))
    off_monotone = all(
        offdiag_rms[k + 1] <= offdiag_rms[k] for k in range(len(offdiag_rms) - 1)
    )
    tot_monotone = all(
        total_rms[k + 1] <= total_rms[k] for k in range(len(total_rms) - 1)
    )
    return YoungRoughReport(
        resolutions=tuple(resolutions),
        offdiag_gap_rms=offdiag_rms,
        diag_gap_mean=diag_mean,
        total_gap_rms=total_rms,
        offdiag_monotone=off_monotone,
        total_monotone=tot_monotone,
        n_mc=n_mc,
    )
