"""Experiment harness: configs, deterministic CSV output, CLI."""

from .config import EXPERIMENTS, ExperimentConfig, build_config, parse_config_file
from .runner import (
    run_covariance_check,
    run_levy_convergence,
    run_milstein_convergence,
    run_rho_variation,
    run_signature_features,
    run_simulate,
)

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "build_config",
    "parse_config_file",
    "run_covariance_check",
    "run_levy_convergence",
    "run_milstein_convergence",
    "run_rho_variation",
    "run_signature_features",
    "run_simulate",
]
