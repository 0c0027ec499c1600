"""Exact sampling of tfBm on uniform grids via circulant embedding.

The stationary increment sequence of one tfBm component has autocovariance

    gamma(k) = [C((k+1) step) + C(|k-1| step) - 2 C(k step)] / 2,

which is embedded in a circulant matrix of size m = 2N (doubled on
negative-eigenvalue failure up to 16N) following the standard
Dietrich--Newsam construction; one length-m FFT per component then yields an
exact draw of N increments.  A dense-Cholesky sampler doubles as the
O(N^2)-O(N^3) oracle and as the fallback when the embedding fails.

All sampling is a pure function of (params, n_steps, n_paths, RngSpec):
path p consumes only the counter-based substream ``rng.stream + p``, so
output is bit-reproducible and paths can be generated in any order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import IO, Iterator, Sequence, Union

import numpy as np

from .covariance import covariance_grid, variance_grid
from .errors import DomainError, SimulationError
from .params import ModelParams, Partition, RngSpec

__all__ = [
    "SamplePath",
    "EmbeddingReport",
    "SimulationResult",
    "increment_autocovariance",
    "increment_autocovariance_seq",
    "simulate_paths",
    "simulate_paths_cholesky",
    "write_path_csv",
    "write_paths_binary",
]

_MAX_DOUBLINGS = 3  # embedding sizes 2N, 4N, 8N, 16N
_EIG_CLIP_REL = 1e-10  # clip eigenvalues in [-tol*max, 0)
_CLIP_MASS_REL = 1e-8  # abort to Cholesky if clipped mass exceeds this x trace


# ---------------------------------------------------------------------------
# Sample containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplePath:
    """A d-dimensional discrete sample, values[i, k] = B_k(t_i), B(0) = 0."""

    params: ModelParams
    partition: Partition
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DomainError("path values must be a 2-d array (n_points, dim)")
        if values.shape != (self.partition.times.size, self.params.dim):
            raise DomainError(
                f"path shape {values.shape} does not match grid length "
                f"{self.partition.times.size} and dim {self.params.dim}"
            )
        if np.any(values[0] != 0.0):
            raise DomainError("paths must start at 0 in every component")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_steps(self) -> int:
        return self.partition.n_intervals

    def increments(self) -> np.ndarray:
        """Per-step increments, shape (n_steps, dim)."""
        return np.diff(self.values, axis=0)

    def coarsen(self, stride: int) -> "SamplePath":
        """The restriction of this path to every ``stride``-th grid point."""
        if stride < 1 or self.n_steps % stride != 0:
            raise DomainError(
                f"stride {stride} must divide the step count {self.n_steps}"
            )
        return SamplePath(
            params=self.params,
            partition=Partition(self.partition.times[::stride]),
            values=self.values[::stride],
        )


@dataclass(frozen=True)
class EmbeddingReport:
    """Diagnostics of the circulant embedding used for a simulation."""

    size: int
    n_doublings: int
    min_eigenvalue: float
    max_eigenvalue: float
    clipped_ratio: float  # clipped negative mass relative to the trace
    valid: bool


@dataclass(frozen=True)
class SimulationResult(Sequence):
    """Paths plus how they were produced.  Behaves as a sequence of paths."""

    paths: tuple[SamplePath, ...]
    method: str  # "circulant" or "cholesky"
    fallback: bool  # True when circulant embedding failed and Cholesky ran
    embedding: EmbeddingReport | None

    def __len__(self) -> int:
        return len(self.paths)

    def __getitem__(self, i):
        return self.paths[i]

    def __iter__(self) -> Iterator[SamplePath]:
        return iter(self.paths)


# ---------------------------------------------------------------------------
# Increment autocovariance
# ---------------------------------------------------------------------------

def increment_autocovariance(params: ModelParams, step: float, lag: int) -> float:
    """gamma(lag) = E[(B((i+1)s) - B(is)) (B((i+lag+1)s) - B((i+lag)s))].

    Independent of i by stationarity of increments; assembled from the
    variance as [C((k+1)s) + C(|k-1|s) - 2 C(ks)] / 2.
    """
    if not step > 0.0:
        raise DomainError(f"step must be positive, got {step}")
    if lag < 0 or int(lag) != lag:
        raise DomainError(f"lag must be an integer >= 0, got {lag}")
    c = variance_grid(
        params, step * np.array([lag + 1.0, abs(lag - 1.0), float(lag)])
    )
    return float(0.5 * (c[0] + c[1] - 2.0 * c[2]))


def increment_autocovariance_seq(params: ModelParams, step: float, n: int) -> np.ndarray:
    """gamma(0..n) in one vectorized evaluation."""
    if not step > 0.0:
        raise DomainError(f"step must be positive, got {step}")
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    c = variance_grid(params, step * np.arange(n + 2, dtype=float))
    lags = np.arange(n + 1)
    return 0.5 * (c[lags + 1] + c[np.abs(lags - 1)] - 2.0 * c[lags])


# ---------------------------------------------------------------------------
# Circulant embedding
# ---------------------------------------------------------------------------

def _try_embedding(params: ModelParams, step: float, n_steps: int):
    """Search embedding sizes 2N, 4N, ... 16N for nonnegative eigenvalues.

    Returns (eigenvalues clipped at 0, report).  ``report.valid`` is False
    when no admissible size was found or the clipped mass is too large; the
    caller then falls back to dense Cholesky.
    """
    report = None
    for doubling in range(_MAX_DOUBLINGS + 1):
        m = 2 * n_steps * 2 ** doubling
        gamma = increment_autocovariance_seq(params, step, m // 2)
        first_row = np.concatenate([gamma, gamma[-2:0:-1]])
        eig = np.fft.fft(first_row).real
        eig_max = float(eig.max())
        eig_min = float(eig.min())
        report = EmbeddingReport(
            size=m,
            n_doublings=doubling,
            min_eigenvalue=eig_min,
            max_eigenvalue=eig_max,
            clipped_ratio=0.0,
            valid=False,
        )
        if eig_min >= -_EIG_CLIP_REL * eig_max:
            negative = eig < 0.0
            clipped_mass = float(-eig[negative].sum())
            trace = float(eig.sum())
            clipped_ratio = clipped_mass / trace if trace > 0.0 else np.inf
            valid = clipped_ratio <= _CLIP_MASS_REL
            report = EmbeddingReport(
                size=m,
                n_doublings=doubling,
                min_eigenvalue=eig_min,
                max_eigenvalue=eig_max,
                clipped_ratio=clipped_ratio,
                valid=valid,
            )
            if valid:
                eig = np.where(negative, 0.0, eig)
                return eig, report
            return None, report
    return None, report


def _circulant_increments(
    sqrt_eig: np.ndarray, n_steps: int, dim: int, gen: np.random.Generator
) -> np.ndarray:
    """Draw one path's increments, shape (n_steps, dim), from the embedding."""
    m = sqrt_eig.size
    half = m // 2
    out = np.empty((n_steps, dim))
    for comp in range(dim):
        a = gen.standard_normal(half + 1)
        b = gen.standard_normal(half + 1)
        z = np.empty(m, dtype=complex)
        z[0] = a[0]
        z[half] = a[half]
        z[1:half] = (a[1:half] + 1j * b[1:half]) / np.sqrt(2.0)
        z[half + 1 :] = np.conj(z[half - 1 : 0 : -1])
        x = np.fft.ifft(sqrt_eig * z)
        out[:, comp] = np.sqrt(m) * x.real[:n_steps]
    return out


def simulate_paths(
    params: ModelParams, n_steps: int, n_paths: int, rng: RngSpec
) -> SimulationResult:
    """Exact tfBm samples on the uniform n_steps grid over [0, horizon].

    Uses the circulant embedding (O(N log N) per component); if no
    admissible embedding exists up to 16N the call falls back to the dense
    Cholesky sampler and flags it in the result metadata.  Components are
    independent; path p is drawn from substream ``rng.stream + p``.
    """
    if n_steps < 1:
        raise DomainError(f"n_steps must be >= 1, got {n_steps}")
    if n_paths < 1:
        raise DomainError(f"n_paths must be >= 1, got {n_paths}")
    step = params.horizon / n_steps
    partition = Partition.uniform(params.horizon, n_steps)

    eig, report = _try_embedding(params, step, n_steps)
    if eig is None:
        warnings.warn(
            "circulant embedding failed (negative eigenvalue mass after "
            f"{report.n_doublings} doublings); falling back to Cholesky",
            UserWarning,
            stacklevel=2,
        )
        fallback = simulate_paths_cholesky(params, n_steps, n_paths, rng)
        return SimulationResult(
            paths=fallback.paths,
            method="cholesky",
            fallback=True,
            embedding=report,
        )

    sqrt_eig = np.sqrt(eig)
    paths = []
    for p in range(n_paths):
        gen = rng.substream(p).generator()
        increments = _circulant_increments(sqrt_eig, n_steps, params.dim, gen)
        values = np.vstack([np.zeros((1, params.dim)), np.cumsum(increments, axis=0)])
        paths.append(SamplePath(params=params, partition=partition, values=values))
    return SimulationResult(
        paths=tuple(paths), method="circulant", fallback=False, embedding=report
    )


# ---------------------------------------------------------------------------
# Dense Cholesky sampler (oracle / fallback)
# ---------------------------------------------------------------------------

def _cholesky_factor(gram: np.ndarray, jitter_scale: float) -> np.ndarray:
    try:
        return np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * jitter_scale
        try:
            return np.linalg.cholesky(gram + jitter * np.eye(gram.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise SimulationError(
                "covariance Gram matrix is not positive semidefinite "
                f"even after adding jitter {jitter:g}"
            ) from exc


def simulate_paths_cholesky(
    params: ModelParams,
    n_steps: int,
    n_paths: int,
    rng: RngSpec,
    partition: Partition | None = None,
) -> SimulationResult:
    """Exact O(N^2)-O(N^3) sampler; the distributional oracle in tests.

    On the default uniform grid it factorizes the Toeplitz Gram of the
    stationary increments; with an explicit (possibly non-uniform)
    ``partition`` it factorizes the path Gram [R(t_i, t_j)] directly.
    Same determinism contract as `simulate_paths`.
    """
    if n_steps < 1:
        raise DomainError(f"n_steps must be >= 1, got {n_steps}")
    if n_paths < 1:
        raise DomainError(f"n_paths must be >= 1, got {n_paths}")

    if partition is None:
        partition = Partition.uniform(params.horizon, n_steps)
        step = params.horizon / n_steps
        gamma = increment_autocovariance_seq(params, step, n_steps - 1)
        idx = np.arange(n_steps)
        gram = gamma[np.abs(idx[:, None] - idx[None, :])]
        factor = _cholesky_factor(gram, jitter_scale=float(gamma[0]))
        cumulative = True
    else:
        if partition.n_intervals != n_steps:
            raise DomainError(
                f"partition has {partition.n_intervals} intervals, expected {n_steps}"
            )
        gram = covariance_grid(params, partition.times[1:])
        factor = _cholesky_factor(gram, jitter_scale=float(np.max(np.diag(gram))))
        cumulative = False

    paths = []
    for p in range(n_paths):
        gen = rng.substream(p).generator()
        values = np.empty((n_steps + 1, params.dim))
        values[0] = 0.0
        for comp in range(params.dim):
            z = gen.standard_normal(n_steps)
            draw = factor @ z
            values[1:, comp] = np.cumsum(draw) if cumulative else draw
        paths.append(SamplePath(params=params, partition=partition, values=values))
    return SimulationResult(
        paths=tuple(paths), method="cholesky", fallback=False, embedding=None
    )


# ---------------------------------------------------------------------------
# Dumps
# ---------------------------------------------------------------------------

def write_path_csv(path: SamplePath, stream: IO[str]) -> None:
    """Write one path as CSV: header ``t,comp0,...``, one row per grid point."""
    dim = path.params.dim
    stream.write("t," + ",".join(f"comp{k}" for k in range(dim)) + "\n")
    for t, row in zip(path.partition.times, path.values):
        stream.write(repr(float(t)) + "," + ",".join(repr(float(v)) for v in row) + "\n")


def write_paths_binary(paths: Sequence[SamplePath], stream: IO[bytes]) -> None:
    """Write paths as little-endian float64, row-major.

    Layout: for each path in order, (n_points x (1 + dim)) rows of
    [t, comp0, ..., comp_{dim-1}].  No header; the reader must know the
    shape (documented in the README together with the producing config).
    """
    for path in paths:
        block = np.column_stack([path.partition.times, path.values])
        stream.write(np.ascontiguousarray(block, dtype="<f8").tobytes())
