"""Exception types shared across the library.

Every error raised on purpose by this package derives from ``TempRoughError``,
so callers can catch library failures without masking programming errors.
"""


class TempRoughError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(TempRoughError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedDepthError(DomainError):
    """A signature/decay computation was requested beyond the supported depth."""


class ConfigError(TempRoughError, ValueError):
    """An experiment configuration is inconsistent or incomplete."""


class SimulationError(TempRoughError, RuntimeError):
    """Path generation failed (e.g. a covariance factorization is not PSD)."""


class DivergenceError(TempRoughError, RuntimeError):
    """A numerical scheme produced a non-finite state.

    Attributes
    ----------
    step : int
        Index of the time step at which the state first became non-finite.
    """

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step
