"""Model parameters, time grids, and deterministic RNG specification."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = ["ModelParams", "Partition", "RngSpec"]


# ---------------------------------------------------------------------------
# Model parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Parameters of a d-dimensional tempered fractional Brownian motion.

    Attributes
    ----------
    hurst : float
        Hurst parameter H, in (0, 1).
    lam : float
        Tempering parameter lambda > 0 (units of inverse time).  With the
        normalization used throughout this package the process converges to
        standard fractional Brownian motion (variance t^{2H}) as lam -> 0.
    dim : int
        Number of independent components (>= 1).
    horizon : float
        Time horizon T > 0; grids and experiments live on [0, T].
    """

    hurst: float
    lam: float
    dim: int = 1
    horizon: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.hurst < 1.0):
            raise DomainError(f"hurst must lie in (0, 1), got {self.hurst}")
        if not self.lam > 0.0:
            raise DomainError(f"lam must be positive, got {self.lam}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dim must be an integer >= 1, got {self.dim}")
        if not self.horizon > 0.0:
            raise DomainError(f"horizon must be positive, got {self.horizon}")

    def require_lift(self) -> None:
        """Reject parameter sets for which the level-2 lift is not available.

        Operations that build or consume the level-2 rough-path lift require
        hurst > 1/4; below that threshold the dyadic area approximations do
        not converge in L^2 without renormalization, which this package does
        not implement.
        """
        if not self.hurst > 0.25:
            raise DomainError(
                f"level-2 lift operations require hurst > 1/4, got {self.hurst}"
            )

    def with_(self, **changes) -> "ModelParams":
        """Return a copy with the given fields replaced."""
        values = {
            "hurst": self.hurst,
            "lam": self.lam,
            "dim": self.dim,
            "horizon": self.horizon,
        }
        values.update(changes)
        return ModelParams(**values)


# ---------------------------------------------------------------------------
# Time grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Partition:
    """An ordered time grid 0 = t_0 < t_1 < ... < t_N = T.

    ``mesh`` (the maximum adjacent gap) is derived from ``times`` on
    construction and kept consistent by the frozen dataclass contract.
    """

    times: np.ndarray
    mesh: float = field(init=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise DomainError("partition needs at least the two points {0, T}")
        if times[0] != 0.0:
            raise DomainError(f"partition must start at 0, got t_0={times[0]}")
        gaps = np.diff(times)
        if np.any(gaps <= 0.0):
            raise DomainError("partition times must be strictly increasing")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "mesh", float(gaps.max()))

    # -- derived views ------------------------------------------------------

    @property
    def end(self) -> float:
        """The horizon T = times[-1]."""
        return float(self.times[-1])

    @property
    def n_intervals(self) -> int:
        return self.times.size - 1

    @property
    def deltas(self) -> np.ndarray:
        """Adjacent gaps t_{i+1} - t_i, length ``n_intervals``."""
        return np.diff(self.times)

    # -- constructors -------------------------------------------------------

    @classmethod
    def uniform(cls, horizon: float, n_intervals: int) -> "Partition":
        if n_intervals < 1:
            raise DomainError("uniform partition needs at least one interval")
        if not horizon > 0.0:
            raise DomainError("horizon must be positive")
        return cls(np.linspace(0.0, horizon, n_intervals + 1))

    @classmethod
    def dyadic(cls, horizon: float, depth: int) -> "Partition":
        if depth < 0:
            raise DomainError("dyadic depth must be >= 0")
        return cls.uniform(horizon, 2 ** depth)


# ---------------------------------------------------------------------------
# RNG specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RngSpec:
    """Deterministic RNG identity: a 64-bit seed plus a substream index.

    Identical (seed, stream) pairs reproduce bit-identical output on one
    platform.  Monte Carlo loops assign consecutive substreams to paths
    (path p uses ``stream + p``), which makes path generation order-free
    and embarrassingly parallel, and keeps path p's randomness identical
    across parameter cells that share a seed (common random numbers).
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if int(self.seed) != self.seed or not (0 <= self.seed < 2 ** 64):
            raise DomainError(f"seed must be a 64-bit integer, got {self.seed}")
        if int(self.stream) != self.stream or self.stream < 0:
            raise DomainError(f"stream must be an integer >= 0, got {self.stream}")

    def substream(self, offset: int) -> "RngSpec":
        """The spec for substream ``stream + offset`` (offset >= 0)."""
        if offset < 0:
            raise DomainError("substream offset must be >= 0")
        return RngSpec(self.seed, self.stream + offset)

    def generator(self) -> np.random.Generator:
        """A counter-based generator dedicated to this (seed, stream) pair."""
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.Philox(seq))
