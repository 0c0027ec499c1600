"""temprough: the canonical rough-path lift of tempered fractional Brownian motion.

Covariance evaluation and decomposition with explicit constants, 2D
rho-variation estimation, exact path simulation (circulant embedding with a
Cholesky fallback), Levy-area construction via piecewise-linear lifts,
truncated signatures, Milstein-type RDE solving, and a CLI reproducing the
associated convergence experiments.
"""

from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    SimulationError,
    TempRoughError,
    UnsupportedDepthError,
)
from .params import ModelParams, Partition, RngSpec
from .covariance import (
    DecompositionConstants,
    DecompositionReport,
    covariance,
    covariance_grid,
    decomposition_error_bounds,
    fbm_covariance,
    fbm_kernel,
    incremental_covariance,
    lemma_partition_bound_check,
    rho_variation_sum,
    tfbm_kernel,
    variance,
    variance_grid,
    variance_quadrature,
    verify_decomposition,
)
from .simulate import (
    EmbeddingReport,
    SamplePath,
    SimulationResult,
    increment_autocovariance,
    increment_autocovariance_seq,
    simulate_paths,
    simulate_paths_cholesky,
    write_path_csv,
    write_paths_binary,
)
from .reports import ConvergenceReport, fit_loglog_slope, rms_and_stderr
from .roughpath import (
    FactorialDecayReport,
    RoughPathLift,
    TruncatedSignature,
    chen_compose,
    factorial_decay_check,
    lift_piecewise_linear,
    refinement_error,
    refinement_error_profile,
    signature_truncated,
)
from .rde import (
    VectorField,
    YoungRoughReport,
    exact_scalar_linear,
    jacobian_check,
    linear_scalar_field,
    milstein_solve,
    strong_error,
    young_vs_rough_compare,
)

__version__ = "0.1.0"

__all__ = [
    "TempRoughError",
    "DomainError",
    "UnsupportedDepthError",
    "ConfigError",
    "SimulationError",
    "DivergenceError",
    "ModelParams",
    "Partition",
    "RngSpec",
    "variance",
    "variance_grid",
    "variance_quadrature",
    "covariance",
    "covariance_grid",
    "fbm_covariance",
    "incremental_covariance",
    "tfbm_kernel",
    "fbm_kernel",
    "DecompositionConstants",
    "DecompositionReport",
    "decomposition_error_bounds",
    "verify_decomposition",
    "rho_variation_sum",
    "lemma_partition_bound_check",
    "SamplePath",
    "EmbeddingReport",
    "SimulationResult",
    "increment_autocovariance",
    "increment_autocovariance_seq",
    "simulate_paths",
    "simulate_paths_cholesky",
    "write_path_csv",
    "write_paths_binary",
    "ConvergenceReport",
    "fit_loglog_slope",
    "rms_and_stderr",
    "RoughPathLift",
    "TruncatedSignature",
    "FactorialDecayReport",
    "lift_piecewise_linear",
    "chen_compose",
    "refinement_error",
    "refinement_error_profile",
    "signature_truncated",
    "factorial_decay_check",
    "VectorField",
    "YoungRoughReport",
    "linear_scalar_field",
    "jacobian_check",
    "milstein_solve",
    "exact_scalar_linear",
    "strong_error",
    "young_vs_rough_compare",
]
