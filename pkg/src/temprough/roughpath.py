"""Level-2 rough-path lifts, refinement errors, and truncated signatures.

The piecewise-linear lift of a discrete path assigns to each adjacent
interval the tensor (1/2) dB_i (x) dB_i and extends to arbitrary spans by
Chen's relation

    BB(s, t) = BB(s, u) + BB(u, t) + dB(s, u) (x) dB(u, t).

Index convention: BB(s, t)[a, b] is the iterated integral of component a
against component b, integral over s < u1 < u2 < t of dB^a(u1) dB^b(u2).
Storage is O(N): per-interval blocks plus the prefix tensors BB(t_0, t_i);
any BB(t_i, t_j) is reconstructed with a single Chen composition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedDepthError
from .params import ModelParams, RngSpec
from .reports import ConvergenceReport, fit_loglog_slope, rms_and_stderr
from .simulate import SamplePath, simulate_paths

__all__ = [
    "RoughPathLift",
    "lift_piecewise_linear",
    "chen_compose",
    "refinement_error",
    "refinement_error_profile",
    "TruncatedSignature",
    "signature_truncated",
    "FactorialDecayReport",
    "factorial_decay_check",
]


# ---------------------------------------------------------------------------
# The lift
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoughPathLift:
    """A path with its level-2 tensors in O(N) prefix storage.

    ``cells[k]`` is BB(t_k, t_{k+1}); ``prefix[i]`` is BB(t_0, t_i).
    """

    path: SamplePath
    cells: np.ndarray  # (N, d, d)
    prefix: np.ndarray  # (N+1, d, d)

    @property
    def n_steps(self) -> int:
        return self.path.n_steps

    @property
    def dim(self) -> int:
        return self.path.params.dim

    def _check_index(self, i: int) -> None:
        if not (0 <= i <= self.n_steps):
            raise DomainError(f"grid index {i} outside 0..{self.n_steps}")

    def increment(self, i: int, j: int) -> np.ndarray:
        """dB(t_i, t_j) = B(t_j) - B(t_i)."""
        self._check_index(i)
        self._check_index(j)
        return self.path.values[j] - self.path.values[i]

    def level2(self, i: int, j: int) -> np.ndarray:
        """BB(t_i, t_j) for i <= j, via one Chen composition of prefixes."""
        self._check_index(i)
        self._check_index(j)
        if i > j:
            raise DomainError(f"level2 needs i <= j, got i={i}, j={j}")
        if i == j:
            return np.zeros((self.dim, self.dim))
        if j == i + 1:
            return self.cells[i].copy()
        values = self.path.values
        cross = np.outer(values[i] - values[0], values[j] - values[i])
        return self.prefix[j] - self.prefix[i] - cross

    def adjacent_tensors(self) -> np.ndarray:
        """All BB(t_k, t_{k+1}) as one (N, d, d) array (read-only view)."""
        return self.cells


def lift_piecewise_linear(path: SamplePath) -> RoughPathLift:
    """Level-2 lift of the piecewise-linear interpolation of ``path``.

    Adjacent intervals get (1/2) dB_k (x) dB_k; prefixes accumulate by
    Chen's relation.  Requires hurst > 1/4 (below that the model's dyadic
    lift approximations do not converge) and at least two grid points.
    """
    if path.partition.times.size < 2:
        raise DomainError("a lift needs at least 2 grid points")
    path.params.require_lift()
    values = path.values
    db = np.diff(values, axis=0)
    rel = values[:-1] - values[0]
    cells = 0.5 * np.einsum("ka,kb->kab", db, db)
    cross = np.einsum("ka,kb->kab", rel, db)
    dim = values.shape[1]
    prefix = np.empty((values.shape[0], dim, dim))
    prefix[0] = 0.0
    np.cumsum(cells + cross, axis=0, out=prefix[1:])
    cells.setflags(write=False)
    prefix.setflags(write=False)
    return RoughPathLift(path=path, cells=cells, prefix=prefix)


def chen_compose(lift: RoughPathLift, i: int, k: int, j: int) -> np.ndarray:
    """BB(t_i, t_k) + BB(t_k, t_j) + dB(t_i, t_k) (x) dB(t_k, t_j)."""
    if not (i <= k <= j):
        raise DomainError(f"chen_compose needs i <= k <= j, got {(i, k, j)}")
    return (
        lift.level2(i, k)
        + lift.level2(k, j)
        + np.outer(lift.increment(i, k), lift.increment(k, j))
    )


# ---------------------------------------------------------------------------
# Refinement error e(N)
# ---------------------------------------------------------------------------

def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _refinement_squared_errors(
    params: ModelParams, resolutions: list[int], n_mc: int, rng: RngSpec
) -> np.ndarray:
    """Per-path squared Frobenius norms of BB^{(2N)}(0,T) - BB^{(N)}(0,T).

    One fine sample per path at 2 max(resolutions) steps; every coarser
    grid path is its restriction, so each (N, 2N) pair carries exactly the
    two-grid coupling of the definition, and all resolutions share one
    realization (common random numbers across levels and, for equal seeds,
    across parameter cells).

    Returns an (n_mc, len(resolutions)) array, resolutions ascending.
    """
    params.require_lift()
    if params.dim < 2:
        raise DomainError("refinement error needs dim >= 2 (area is trivial in 1d)")
    if n_mc < 2:
        raise DomainError(f"n_mc must be >= 2, got {n_mc}")
    if not resolutions or sorted(set(resolutions)) != list(resolutions):
        raise DomainError("resolutions must be strictly increasing and nonempty")
    for n in resolutions:
        if not _is_power_of_two(n):
            raise DomainError(f"resolutions must be powers of two, got {n}")

    n_fine = 2 * max(resolutions)
    result = simulate_paths(params, n_fine, n_mc, rng)
    sq = np.empty((n_mc, len(resolutions)))
    descending = sorted(resolutions, reverse=True)
    for p, path in enumerate(result):
        fine = lift_piecewise_linear(path)
        terminal_fine = fine.prefix[-1]
        current = path
        for n in descending:
            if current.n_steps != 2 * n:
                current = current.coarsen(current.n_steps // (2 * n))
                terminal_fine = lift_piecewise_linear(current).prefix[-1]
            coarse = current.coarsen(2)
            terminal_coarse = lift_piecewise_linear(coarse).prefix[-1]
            diff = terminal_fine - terminal_coarse
            sq[p, resolutions.index(n)] = float(np.sum(diff * diff))
            current = coarse
            terminal_fine = terminal_coarse
    return sq


def refinement_error(params: ModelParams, n: int, n_mc: int, rng: RngSpec) -> float:
    """e(N) = (E[ |BB^{(N)}(0,T) - BB^{(2N)}(0,T)|_F^2 ])^{1/2} by Monte Carlo.

    Paths are simulated on the 2N grid; the N-grid path is its coarsening,
    so both lifts share one realization.  Requires dim >= 2, N a power of
    two, and n_mc >= 2.
    """
    sq = _refinement_squared_errors(params, [n], n_mc, rng)
    return float(np.sqrt(sq[:, 0].mean()))


def refinement_error_profile(
    params: ModelParams, resolutions: list[int], n_mc: int, rng: RngSpec
) -> ConvergenceReport:
    """e(N) across resolutions with error bars and a fitted log-log slope.

    All resolutions are evaluated on coarsenings of one fine sample per
    path (see `_refinement_squared_errors`), which keeps the Monte Carlo
    noise common across levels.
    """
    resolutions = list(resolutions)
    sq = _refinement_squared_errors(params, resolutions, n_mc, rng)
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
# Truncated signatures
# ---------------------------------------------------------------------------

_MAX_SIGNATURE_DEPTH = 8


@dataclass(frozen=True)
class TruncatedSignature:
    """Signature levels 0..K; level k is a (dim,)*k tensor, level 0 is 1."""

    levels: tuple[np.ndarray, ...]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def dim(self) -> int:
        return self.levels[1].shape[0] if self.depth >= 1 else 0

    def level(self, k: int) -> np.ndarray:
        if not (0 <= k <= self.depth):
            raise DomainError(f"level {k} outside 0..{self.depth}")
        return self.levels[k]


def _segment_exponential(x: np.ndarray, depth: int) -> list[np.ndarray]:
    """Signature of one linear segment: levels x^{(x) k} / k!."""
    levels = [np.array(1.0)]
    for k in range(1, depth + 1):
        levels.append(np.multiply.outer(levels[-1], x) / k)
    return levels


def _chen_product(a: list[np.ndarray], b: list[np.ndarray], depth: int) -> list[np.ndarray]:
    """Truncated tensor-algebra product: c_k = sum_r a_r (x) b_{k-r}."""
    out = []
    for k in range(depth + 1):
        acc = np.multiply.outer(a[0], b[k])
        for r in range(1, k + 1):
            acc = acc + np.multiply.outer(a[r], b[k - r])
        out.append(acc)
    return out


def signature_truncated(lift: RoughPathLift, depth: int) -> TruncatedSignature:
    """Signature of the piecewise-linear path underlying ``lift``, levels 0..K.

    Each segment contributes the tensor exponential of its increment (all
    iterated integrals of a line segment are powers over factorials); the
    Chen product over segments is exact for polylines.  Levels 1 and 2
    coincide with the lift's increment and level-2 tensor.
    """
    if depth < 0 or int(depth) != depth:
        raise DomainError(f"depth must be an integer >= 0, got {depth}")
    if depth > _MAX_SIGNATURE_DEPTH:
        raise UnsupportedDepthError(
            f"signature depth {depth} unsupported (max {_MAX_SIGNATURE_DEPTH})"
        )
    dim = lift.dim
    signature = [np.array(1.0)] + [
        np.zeros((dim,) * k) for k in range(1, depth + 1)
    ]
    for x in np.diff(lift.path.values, axis=0):
        segment = _segment_exponential(x, depth)
        signature = _chen_product(signature, segment, depth)
    return TruncatedSignature(levels=tuple(signature))


# ---------------------------------------------------------------------------
# Factorial decay of signature levels
# ---------------------------------------------------------------------------

_MAX_DECAY_DEPTH = 6


@dataclass(frozen=True)
class FactorialDecayReport:
    """Monte Carlo estimates of E[|level k|^2]^{1/2} against factorial decay.

    ``c_hat`` is the smallest constant for which
    rms_k <= c_hat^k T^{kH} / (k/2)! holds at every level;
    ``ratios[k]`` = (rms_k / T^{kH}) / (rms_{k-1} / T^{(k-1)H}) for k >= 2.
    Super-exponential decay shows as ratios decreasing from k = 3 on.
    """

    depth: int
    rms: tuple[float, ...]  # index k-1 holds level k
    normalized: tuple[float, ...]  # rms_k / T^{kH}
    ratios: tuple[float, ...]  # successive normalized ratios, k = 2..K
    c_hat: float
    ratios_decreasing_from_3: bool
    level1_analytic: float  # sqrt(dim * C(T)) for the cross-check
    n_mc: int
    n_steps: int


def factorial_decay_check(
    params: ModelParams,
    depth: int,
    n_mc: int,
    rng: RngSpec,
    n_steps: int = 256,
) -> FactorialDecayReport:
    """Estimate signature level norms by Monte Carlo and fit the decay constant.

    Signatures are those of the piecewise-linear interpolation at
    ``n_steps`` resolution.  ``depth`` is capped at 6.
    """
    if depth < 1 or int(depth) != depth:
        raise DomainError(f"depth must be an integer >= 1, got {depth}")
    if depth > _MAX_DECAY_DEPTH:
        raise UnsupportedDepthError(
            f"factorial decay check supports depth <= {_MAX_DECAY_DEPTH}, got {depth}"
        )
    if n_mc < 2:
        raise DomainError(f"n_mc must be >= 2, got {n_mc}")
    params.require_lift()

    from .covariance import variance  # local import to keep module deps one-way

    sums = np.zeros(depth)
    result = simulate_paths(params, n_steps, n_mc, rng)
    for path in result:
        sig = signature_truncated(lift_piecewise_linear(path), depth)
        for k in range(1, depth + 1):
            level = sig.level(k)
            sums[k - 1] += float(np.sum(level * level))
    rms = np.sqrt(sums / n_mc)

    horizon, hurst = params.horizon, params.hurst
    powers = horizon ** (hurst * np.arange(1, depth + 1))
    normalized = rms / powers
    from math import gamma as _gamma

    half_factorials = np.array([_gamma(k / 2.0 + 1.0) for k in range(1, depth + 1)])
    c_hat = float(np.max((rms * half_factorials / powers) ** (1.0 / np.arange(1, depth + 1))))
    ratios = tuple(float(normalized[k] / normalized[k - 1]) for k in range(1, depth))
    # ratios[i] is the step from level i+1 to level i+2; "from k=3" means
    # comparing successive ratios starting at the one that lands on level 3.
    tail = [ratios[i] for i in range(1, len(ratios))]
    decreasing = all(tail[i + 1] <= tail[i] for i in range(len(tail) - 1))
    return FactorialDecayReport(
        depth=depth,
        rms=tuple(float(v) for v in rms),
        normalized=tuple(float(v) for v in normalized),
        ratios=ratios,
        c_hat=c_hat,
        ratios_decreasing_from_3=decreasing,
        level1_analytic=float(np.sqrt(params.dim * variance(params, horizon))),
        n_mc=n_mc,
        n_steps=n_steps,
    )
