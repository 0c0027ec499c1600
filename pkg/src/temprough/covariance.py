"""Variance/covariance of tempered fractional Brownian motion (tfBm).

One component of the process is the centered Gaussian process with moving-
average representation

    B(t) = (1/N) * integral over u in (-inf, t] of
           [ e^{-lam (t-u)} (t-u)^{H-1/2} - e^{lam u} (-u)^{H-1/2} 1_{u<0} ] dW_u,

where the constant N is chosen so that the lam -> 0 limit is *standard*
fractional Brownian motion with variance t^{2H}:

    N^2 = Gamma(1-H) Gamma(H+1/2) / (H sqrt(pi) 2^{2H}).

The variance C(t) = E[B(t)^2] then has the closed form

    C(t) = [ 2 Gamma(2H) / (2 lam)^{2H}
             - (2 Gamma(H+1/2)/sqrt(pi)) (t/(2 lam))^H K_H(lam t) ] / N^2,

with K_H the modified Bessel function of the second kind.  That expression
cancels catastrophically for small lam*t, so this module evaluates it on two
branches:

* ``lam*t <= 2``: a cancellation-free power series,
  C(t) = t^{2H} F2(lam t) - G lam^{-2H} (F1(lam t) - 1), where
  F1(z) = sum_m (z^2/4)^m / (m! (1-H)_m),
  F2(z) = sum_m (z^2/4)^m / (m! (1+H)_m),
  G = 2^{2H} Gamma(1+H) / Gamma(1-H);
* ``lam*t > 2``: the Bessel closed form above.

An independent adaptive-quadrature evaluation of the squared kernel
(`variance_quadrature`) is kept as the reference oracle; the tests hold the
two routes together to ~1e-12.  Covariances follow from stationary increments:

    R(s, t) = [C(t) + C(s) - C(|t-s|)] / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.integrate import quad
from scipy.special import kv

from .errors import DomainError
from .params import ModelParams, Partition

__all__ = [
    "variance",
    "variance_grid",
    "variance_quadrature",
    "covariance",
    "covariance_grid",
    "fbm_covariance",
    "incremental_covariance",
    "DecompositionConstants",
    "c1_theorem",
    "c1_appendix",
    "decomposition_error_bounds",
    "DecompositionReport",
    "verify_decomposition",
    "tfbm_kernel",
    "fbm_kernel",
    "rho_variation_sum",
    "lemma_partition_bound_check",
]

_SERIES_CUTOFF = 2.0  # switch from power series to Bessel form at lam*t = 2


# ---------------------------------------------------------------------------
# Variance of one component
# ---------------------------------------------------------------------------

def _n_squared(hurst: float) -> float:
    """Normalization constant N^2 making the lam -> 0 variance equal t^{2H}."""
    return (
        math.gamma(1.0 - hurst)
        * math.gamma(hurst + 0.5)
        / (hurst * math.sqrt(math.pi) * 2.0 ** (2.0 * hurst))
    )


def _variance_series(hurst: float, lam: float, t: np.ndarray) -> np.ndarray:
    """Cancellation-free series branch, valid for lam*t <= ~2."""
    z = lam * t
    q = 0.25 * z * z
    f1m1 = np.zeros_like(q)  # F1(z) - 1, so the fBm term separates exactly
    f2 = np.ones_like(q)
    term1 = np.ones_like(q)
    term2 = np.ones_like(q)
    for m in range(1, 200):
        term1 = term1 * q / (m * (m - hurst))
        term2 = term2 * q / (m * (m + hurst))
        f1m1 = f1m1 + term1
        f2 = f2 + term2
        if max(term1.max(initial=0.0), term2.max(initial=0.0)) < 1e-18:
            break
    g = 2.0 ** (2.0 * hurst) * math.gamma(1.0 + hurst) / math.gamma(1.0 - hurst)
    return t ** (2.0 * hurst) * f2 - g * lam ** (-2.0 * hurst) * f1m1


def _variance_bessel(hurst: float, lam: float, t: np.ndarray) -> np.ndarray:
    """Bessel closed-form branch, numerically safe for lam*t > ~2."""
    z = lam * t
    prefactor = 2.0 * math.gamma(2.0 * hurst) / (2.0 * lam) ** (2.0 * hurst)
    bessel_part = (
        2.0
        * math.gamma(hurst + 0.5)
        / math.sqrt(math.pi)
        * (t / (2.0 * lam)) ** hurst
        * kv(hurst, z)
    )
    return (prefactor - bessel_part) / _n_squared(hurst)


def variance_grid(params: ModelParams, times: Union[Sequence[float], np.ndarray]) -> np.ndarray:
    """Vectorized variance C(t) for an array of times >= 0."""
    t = np.asarray(times, dtype=float)
    if np.any(t < 0.0):
        raise DomainError("variance is defined for t >= 0 only")
    flat = t.ravel()
    out = np.empty_like(flat)
    series = params.lam * flat <= _SERIES_CUTOFF
    if np.any(series):
        out[series] = _variance_series(params.hurst, params.lam, flat[series])
    if not np.all(series):
        out[~series] = _variance_bessel(params.hurst, params.lam, flat[~series])
    return out.reshape(t.shape)


def variance(params: ModelParams, t: float) -> float:
    """Variance C(t) of one tfBm component at time t >= 0."""
    if t < 0.0:
        raise DomainError(f"variance is defined for t >= 0, got t={t}")
    return float(variance_grid(params, np.array([t]))[0])


def variance_quadrature(params: ModelParams, t: float) -> float:
    """Reference evaluation of C(t) by adaptive quadrature of the squared kernel.

    Independent of the series/Bessel production path; used as the
    cross-validation oracle (agreement ~1e-12 in tests, design tolerance
    1e-10).  Substitutions flatten the u^{2H-1}-type integrable singularity
    at the origin for H < 1/2, where naive rules lose accuracy.
    """
    hurst, lam = params.hurst, params.lam
    if t < 0.0:
        raise DomainError(f"variance is defined for t >= 0, got t={t}")
    if t == 0.0:
        return 0.0
    a = 1.0 / (2.0 * hurst)
    kw = dict(epsabs=1e-14, epsrel=1e-12, limit=400)

    # Kernel mass on [0, t]: integral of e^{-2 lam s} s^{2H-1} ds,
    # substituted w = s^{2H} so the integrand is bounded and smooth.
    i1, _ = quad(lambda w: math.exp(-2.0 * lam * w ** a), 0.0, t ** (2.0 * hurst), **kw)
    i1 /= 2.0 * hurst

    # Kernel-difference mass on (-inf, 0]:
    def g(v: float) -> float:
        return math.exp(-lam * (t + v)) * (t + v) ** (hurst - 0.5) - math.exp(
            -lam * v
        ) * v ** (hurst - 0.5)

    if hurst < 0.5:
        # v = w^{1/(2H)} absorbs the v^{2H-1} singularity of g^2 at v -> 0.
        def g2_sub(w: float) -> float:
            v = w ** a
            return g(v) ** 2 * a * w ** (a - 1.0)

        i2a, _ = quad(g2_sub, 0.0, 1.0, **kw)
    else:
        i2a, _ = quad(lambda v: g(v) ** 2, 0.0, 1.0, **kw)
    i2b, _ = quad(lambda v: g(v) ** 2, 1.0, np.inf, **kw)

    return (i1 + i2a + i2b) / _n_squared(hurst)


# ---------------------------------------------------------------------------
# Covariances
# ---------------------------------------------------------------------------

def covariance(params: ModelParams, s: float, t: float) -> float:
    """R(s, t) = [C(t) + C(s) - C(|t-s|)] / 2 for s, t >= 0.

    Symmetric in (s, t) by the exact same floating-point expression.
    """
    if s < 0.0 or t < 0.0:
        raise DomainError(f"covariance needs s, t >= 0, got s={s}, t={t}")
    c = variance_grid(params, np.array([t, s, abs(t - s)]))
    return float(0.5 * (c[0] + c[1] - c[2]))


def covariance_grid(params: ModelParams, times: Union[Sequence[float], np.ndarray]) -> np.ndarray:
    """Gram matrix [R(t_i, t_j)] over an array of times >= 0 (vectorized)."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1:
        raise DomainError("covariance_grid expects a 1-d array of times")
    c = variance_grid(params, t)
    c_gaps = variance_grid(params, np.abs(t[:, None] - t[None, :]))
    return 0.5 * (c[:, None] + c[None, :] - c_gaps)


def fbm_covariance(hurst: float, s: float, t: float) -> float:
    """Standard fBm covariance (s^{2H} + t^{2H} - |t-s|^{2H}) / 2."""
    if not (0.0 < hurst < 1.0):
        raise DomainError(f"hurst must lie in (0, 1), got {hurst}")
    if s < 0.0 or t < 0.0:
        raise DomainError(f"fbm_covariance needs s, t >= 0, got s={s}, t={t}")
    h2 = 2.0 * hurst
    return 0.5 * (s ** h2 + t ** h2 - abs(t - s) ** h2)


def incremental_covariance(
    params: ModelParams, s: float, t: float, u: float, v: float
) -> float:
    """E[(B(t) - B(s)) (B(v) - B(u))] for intervals [s,t], [u,v].

    Equals R(t,v) - R(t,u) - R(s,v) + R(s,u); evaluated here through the
    equivalent four-term form in C alone (the C(t), C(s), C(u), C(v) terms
    cancel), which halves the number of variance calls.
    """
    if s > t or u > v:
        raise DomainError(
            f"intervals must be ordered: need s <= t and u <= v, got "
            f"[{s}, {t}] and [{u}, {v}]"
        )
    if s < 0.0 or u < 0.0:
        raise DomainError("interval endpoints must be >= 0")
    c = variance_grid(
        params, np.array([abs(v - s), abs(u - t), abs(u - s), abs(v - t)])
    )
    return float(0.5 * (c[0] + c[1] - c[2] - c[3]))


# ---------------------------------------------------------------------------
# Decomposition bounds: R = R_fbm + (remainder controlled by two terms)
# ---------------------------------------------------------------------------

def c1_theorem(hurst: float) -> float:
    """Polynomial-term constant, variant Gamma(2H+2)/2 (the larger one)."""
    return math.gamma(2.0 * hurst + 2.0) / 2.0


def c1_appendix(hurst: float) -> float:
    """Polynomial-term constant, variant Gamma(2H+2)/(4 Gamma(H+1/2)^2)."""
    return math.gamma(2.0 * hurst + 2.0) / (4.0 * math.gamma(hurst + 0.5) ** 2)


@dataclass(frozen=True)
class DecompositionConstants:
    """Constants (C1, c, C2) of the covariance-decomposition error bounds.

    ``c_exp = min(1/2, H/2)`` and ``c2 = (2H/(c_exp e))^{2H}`` exactly.  Two
    published variants of C1 exist (`c1_theorem`, `c1_appendix`); the default
    is the appendix variant (the one with a derivation), while bound
    *checking* defaults to the conservative maximum of the two.
    """

    c1: float
    c_exp: float
    c2: float

    def __post_init__(self):
        if not (self.c1 > 0.0 and self.c_exp > 0.0 and self.c2 > 0.0):
            raise DomainError("decomposition constants must be strictly positive")

    @classmethod
    def for_hurst(cls, hurst: float, conservative: bool = False) -> "DecompositionConstants":
        if not (0.0 < hurst < 1.0):
            raise DomainError(f"hurst must lie in (0, 1), got {hurst}")
        c_exp = min(0.5, hurst / 2.0)
        c2 = (2.0 * hurst / (c_exp * math.e)) ** (2.0 * hurst)
        if conservative:
            c1 = max(c1_theorem(hurst), c1_appendix(hurst))
        else:
            c1 = c1_appendix(hurst)
        return cls(c1=c1, c_exp=c_exp, c2=c2)


def decomposition_error_bounds(
    params: ModelParams,
    s: float,
    t: float,
    constants: DecompositionConstants | None = None,
) -> tuple[float, float]:
    """Right-hand sides of the two decomposition error bounds at (s, t).

    Returns ``(bound_poly, bound_exp)`` with

        bound_poly = C1/Gamma(2H) * lam^{2H} * |t-s|^2,
        bound_exp  = C2/(Gamma(2H) lam^{2H}) * exp(-c lam d(s,t)),

    where d(s, t) = max(s, t, |t-s|).
    """
    if s < 0.0 or t < 0.0:
        raise DomainError(f"bounds need s, t >= 0, got s={s}, t={t}")
    if constants is None:
        constants = DecompositionConstants.for_hurst(params.hurst)
    hurst, lam = params.hurst, params.lam
    gamma_2h = math.gamma(2.0 * hurst)
    d = max(s, t, abs(t - s))
    bound_poly = constants.c1 / gamma_2h * lam ** (2.0 * hurst) * (t - s) ** 2
    bound_exp = (
        constants.c2 / (gamma_2h * lam ** (2.0 * hurst)) * math.exp(-constants.c_exp * lam * d)
    )
    return bound_poly, bound_exp


@dataclass(frozen=True)
class DecompositionReport:
    """Outcome of checking |R - R_fbm| <= bound_poly + bound_exp on a grid."""

    n_pairs: int
    n_violations: int
    max_slack: float  # max over pairs of (bound - gap); how loose the bound gets
    min_slack: float  # min over pairs of (bound - gap); negative iff violated
    worst: tuple[float, float, float, float]  # (s, t, gap, bound) at min slack
    violations: list[tuple[float, float, float, float]]

    @property
    def ok(self) -> bool:
        return self.n_violations == 0

    @property
    def max_excess(self) -> float:
        """Largest bound violation gap - bound (<= 0 when the check passes)."""
        return -self.min_slack


def verify_decomposition(
    params: ModelParams,
    grid: Partition,
    constants: DecompositionConstants | None = None,
) -> DecompositionReport:
    """Check the decomposition bound over every ordered pair of grid times.

    Violations are reported, not raised.  ``constants`` defaults to the
    conservative (max-C1) convention so the check is robust to the published
    C1 discrepancy.
    """
    if constants is None:
        constants = DecompositionConstants.for_hurst(params.hurst, conservative=True)
    times = grid.times
    hurst, lam = params.hurst, params.lam
    gamma_2h = math.gamma(2.0 * hurst)

    gram = covariance_grid(params, times)
    h2 = 2.0 * hurst
    powers = times ** h2
    gap_matrix = np.abs(
        gram - 0.5 * (powers[:, None] + powers[None, :] - np.abs(times[:, None] - times[None, :]) ** h2)
    )
    diff = np.abs(times[:, None] - times[None, :])
    d = np.maximum(np.maximum(times[:, None], times[None, :]), diff)
    bound = (
        constants.c1 / gamma_2h * lam ** h2 * diff ** 2
        + constants.c2 / (gamma_2h * lam ** h2) * np.exp(-constants.c_exp * lam * d)
    )
    slack = bound - gap_matrix

    bad = np.argwhere(slack < 0.0)
    violations = [
        (float(times[i]), float(times[j]), float(gap_matrix[i, j]), float(bound[i, j]))
        for i, j in bad
    ]
    wi, wj = np.unravel_index(int(np.argmin(slack)), slack.shape)
    worst = (
        float(times[wi]),
        float(times[wj]),
        float(gap_matrix[wi, wj]),
        float(bound[wi, wj]),
    )
    return DecompositionReport(
        n_pairs=slack.size,
        n_violations=len(violations),
        max_slack=float(slack.max()),
        min_slack=float(slack.min()),
        worst=worst,
        violations=violations,
    )


# ---------------------------------------------------------------------------
# 2D rho-variation of a covariance over one partition
# ---------------------------------------------------------------------------

KernelFn = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def tfbm_kernel(params: ModelParams) -> KernelFn:
    """Rectangular-increment kernel R([s,t] x [u,v]) of tfBm (broadcasts)."""

    def kernel(s, t, u, v):
        s, t, u, v = np.broadcast_arrays(s, t, u, v)
        return 0.5 * (
            variance_grid(params, np.abs(v - s))
            + variance_grid(params, np.abs(u - t))
            - variance_grid(params, np.abs(u - s))
            - variance_grid(params, np.abs(v - t))
        )

    return kernel


def fbm_kernel(hurst: float) -> KernelFn:
    """Rectangular-increment kernel of standard fBm (broadcasts)."""
    if not (0.0 < hurst < 1.0):
        raise DomainError(f"hurst must lie in (0, 1), got {hurst}")
    h2 = 2.0 * hurst

    def kernel(s, t, u, v):
        s, t, u, v = np.broadcast_arrays(s, t, u, v)
        return 0.5 * (
            np.abs(v - s) ** h2
            + np.abs(u - t) ** h2
            - np.abs(u - s) ** h2
            - np.abs(v - t) ** h2
        )

    return kernel


def rho_variation_sum(
    cov: Union[ModelParams, KernelFn], partition: Partition, rho: float
) -> float:
    """The 2D rho-variation sum of a covariance kernel over ONE partition:

        ( sum_{i,j} |R(t_i, t_{i+1}; t_j, t_{j+1})|^rho )^{1/rho}.

    The supremum over partitions is approximated by the caller (typically
    over dyadic refinements).  ``cov`` is either a `ModelParams` (tfBm
    kernel) or a kernel callable broadcasting over numpy arrays.
    """
    if rho < 1.0:
        raise DomainError(f"rho must be >= 1, got {rho}")
    kernel = tfbm_kernel(cov) if isinstance(cov, ModelParams) else cov
    left = partition.times[:-1]
    right = partition.times[1:]
    values = kernel(left[:, None], right[:, None], left[None, :], right[None, :])
    return float(np.sum(np.abs(values) ** rho) ** (1.0 / rho))


def lemma_partition_bound_check(
    alpha: float, beta: float, horizon: float, partition: Partition
) -> tuple[float, float]:
    """Exponential-kernel partition sum against its mesh bound.

    Computes ``sum = sum_{i,j} Delta_i^alpha Delta_j^alpha e^{-beta |t_i - t_j|}``
    over interval left endpoints and the explicit bound

        bound = T delta^{2 alpha - 1} + (2T/beta) e^{beta delta} delta^{2 alpha - 2},

    where delta is the partition mesh.  The e^{beta delta} factor is the
    explicit first-order correction for measuring distances between left
    endpoints; the inequality sum <= bound is rigorous for alpha >= 1 (the
    regime used by the rho-variation sweeps, where alpha = rho >= 1).

    Returns the pair (sum, bound).
    """
    if not (0.0 < alpha < 2.0):
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    if not beta > 0.0:
        raise DomainError(f"beta must be positive, got {beta}")
    if abs(horizon - partition.end) > 1e-12 * max(1.0, abs(horizon)):
        raise DomainError(
            f"horizon {horizon} does not match the partition end {partition.end}"
        )
    lefts = partition.times[:-1]
    deltas = partition.deltas
    weights = deltas ** alpha
    total = float(
        np.sum(
            weights[:, None]
            * weights[None, :]
            * np.exp(-beta * np.abs(lefts[:, None] - lefts[None, :]))
        )
    )
    mesh = partition.mesh
    bound = horizon * mesh ** (2.0 * alpha - 1.0) + (
        2.0 * horizon / beta
    ) * math.exp(beta * mesh) * mesh ** (2.0 * alpha - 2.0)
    return total, bound
