"""Convergence reporting: log-log slope fits and Monte Carlo error bars."""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .errors import DomainError

__all__ = ["ConvergenceReport", "fit_loglog_slope", "rms_and_stderr"]


def fit_loglog_slope(ns: Sequence[float], errors: Sequence[float]) -> tuple[float, float]:
    """Ordinary least squares of log2(error) on log2(n).

    Returns (slope, slope standard error).  Needs >= 3 points so the
    residual variance has at least one degree of freedom.
    """
    ns = np.asarray(ns, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if ns.size != errors.size or ns.size < 3:
        raise DomainError("slope fit needs >= 3 (n, error) pairs of equal length")
    if np.any(ns <= 0.0) or np.any(errors <= 0.0):
        raise DomainError("slope fit needs strictly positive n and error values")
    x = np.log2(ns)
    y = np.log2(errors)
    x_c = x - x.mean()
    sxx = float(np.sum(x_c * x_c))
    slope = float(np.sum(x_c * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    residuals = y - (intercept + slope * x)
    dof = ns.size - 2
    stderr = float(np.sqrt(np.sum(residuals ** 2) / dof / sxx))
    return slope, stderr


def rms_and_stderr(squared_samples: np.ndarray) -> tuple[float, float]:
    """Root-mean-square of samples of a squared error, with a delta-method SE.

    For m_hat = mean(sq) the standard error of sqrt(m_hat) is
    sd(sq) / (2 sqrt(m_hat) sqrt(n)).
    """
    sq = np.asarray(squared_samples, dtype=float)
    if sq.size < 2:
        raise DomainError("need at least 2 samples for an error bar")
    mean_sq = float(sq.mean())
    if mean_sq <= 0.0:
        return 0.0, 0.0
    sd = float(sq.std(ddof=1))
    return float(np.sqrt(mean_sq)), sd / (2.0 * np.sqrt(mean_sq) * np.sqrt(sq.size))


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-resolution Monte Carlo errors plus the fitted log-log slope."""

    resolutions: tuple[int, ...]
    errors: tuple[float, ...]
    stderrs: tuple[float, ...]
    slope: float
    slope_stderr: float
    n_mc: int
    seed: int
    stream: int

    def __post_init__(self):
        if not (len(self.resolutions) == len(self.errors) == len(self.stderrs)):
            raise DomainError("resolutions, errors and stderrs must have equal length")
        if len(self.resolutions) < 3:
            raise DomainError("a convergence report needs at least 3 resolutions")

    def to_csv(self, stream: IO[str]) -> None:
        """Rows ``n,error,stderr`` plus a ``# slope=...`` footer comment."""
        stream.write("n,error,stderr\n")
        for n, err, se in zip(self.resolutions, self.errors, self.stderrs):
            stream.write(f"{n},{err!r},{se!r}\n")
        stream.write(f"# slope={self.slope!r} stderr={self.slope_stderr!r}\n")
