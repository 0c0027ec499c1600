"""Experiment runners: library calls -> printed report + deterministic CSVs.

Cells iterate over the sorted, deduplicated (hurst, lambda) grid so output
bytes never depend on list order in the config.  All Monte Carlo cells
reuse the same (seed, stream) base, which makes errors directly comparable
across lambda at fixed resolution (common random numbers).
"""

from __future__ import annotations

import os
from typing import Dict, List, Tuple

import numpy as np

from ..covariance import rho_variation_sum, variance, verify_decomposition
from ..errors import ConfigError
from ..params import ModelParams, Partition, RngSpec
from ..rde import exact_scalar_linear, linear_scalar_field, milstein_solve, strong_error
from ..reports import ConvergenceReport
from ..roughpath import lift_piecewise_linear, refinement_error_profile, signature_truncated
from ..simulate import SimulationResult, simulate_paths, write_path_csv, write_paths_binary
from .config import ExperimentConfig
from .csvio import render_value, write_csv

__all__ = [
    "run_levy_convergence",
    "run_milstein_convergence",
    "run_signature_features",
    "run_covariance_check",
    "run_rho_variation",
    "run_simulate",
]

Cell = Tuple[float, float]

_MAX_RHO_DEPTH = 12  # 4096^2 kernel evaluations; deeper grids exhaust memory


def _cells(config: ExperimentConfig) -> List[Cell]:
    return [(h, l) for h in sorted(set(config.hurst)) for l in sorted(set(config.lam))]


def _require_slope_points(config: ExperimentConfig) -> None:
    if len(config.resolutions) < 4:
        raise ConfigError(
            f"slope regression needs >= 4 resolutions, got {len(config.resolutions)}"
        )


def _sidecar(out: str, tag: str) -> str:
    stem, ext = os.path.splitext(out)
    return f"{stem}.{tag}{ext or '.csv'}"


# ---------------------------------------------------------------------------
# Levy-area refinement convergence
# ---------------------------------------------------------------------------

def run_levy_convergence(config: ExperimentConfig) -> Dict[Cell, ConvergenceReport]:
    """e(N) per (H, lambda) cell with fitted slopes; CSV `H,lambda,N,error,stderr`."""
    _require_slope_points(config)
    reports: Dict[Cell, ConvergenceReport] = {}
    rows: List[tuple] = []
    footer: List[str] = []
    print(
        f"[levy-convergence] cells={len(_cells(config))} n_mc={config.n_mc} "
        f"N={config.resolutions[0]}..{config.resolutions[-1]}"
    )
    for h, lam in _cells(config):
        params = ModelParams(hurst=h, lam=lam, dim=2, horizon=config.horizon)
        params.require_lift()
        report = refinement_error_profile(
            params, list(config.resolutions), config.n_mc, RngSpec(config.seed)
        )
        reports[(h, lam)] = report
        print(
            f"  H={h:g} lambda={lam:g}: slope={report.slope:.4f} "
            f"(stderr {report.slope_stderr:.4f}), reference -2H = {-2 * h:.2f}"
        )
        rows.extend(
            (h, lam, n, e, se)
            for n, e, se in zip(report.resolutions, report.errors, report.stderrs)
        )
        footer.append(
            f"# slope hurst={render_value(h)} lambda={render_value(lam)}: "
            f"{render_value(report.slope)} stderr={render_value(report.slope_stderr)}"
        )
    if config.out:
        write_csv(config.out, config, "H,lambda,N,error,stderr", rows, footer)
        print(f"wrote {config.out}")
    return reports


# ---------------------------------------------------------------------------
# Milstein strong convergence
# ---------------------------------------------------------------------------

def run_milstein_convergence(config: ExperimentConfig) -> Dict[Cell, ConvergenceReport]:
    """Strong error of the scalar linear scheme; CSV `H,lambda,n,error,stderr`.

    Also dumps one sample trajectory (grid of 100 steps, columns
    `t,driver,exact,milstein`) next to the main CSV for the first cell.
    """
    _require_slope_points(config)
    vf = linear_scalar_field()
    y0 = np.array([1.0])
    reports: Dict[Cell, ConvergenceReport] = {}
    rows: List[tuple] = []
    footer: List[str] = []
    print(
        f"[milstein-convergence] cells={len(_cells(config))} n_mc={config.n_mc} "
        f"n={config.resolutions[0]}..{config.resolutions[-1]}"
    )
    for h, lam in _cells(config):
        params = ModelParams(hurst=h, lam=lam, dim=1, horizon=config.horizon)
        params.require_lift()
        report = strong_error(
            params,
            vf,
            y0,
            list(config.resolutions),
            config.n_mc,
            RngSpec(config.seed),
            exact=exact_scalar_linear,
        )
        reports[(h, lam)] = report
        print(
            f"  H={h:g} lambda={lam:g}: slope={report.slope:.4f} "
            f"(stderr {report.slope_stderr:.4f}), reference -H = {-h:.2f}"
        )
        rows.extend(
            (h, lam, n, e, se)
            for n, e, se in zip(report.resolutions, report.errors, report.stderrs)
        )
        footer.append(
            f"# slope hurst={render_value(h)} lambda={render_value(lam)}: "
            f"{render_value(report.slope)} stderr={render_value(report.slope_stderr)}"
        )
    if config.out:
        write_csv(config.out, config, "H,lambda,n,error,stderr", rows, footer)
        print(f"wrote {config.out}")
        _write_milstein_trajectory(config, vf, y0)
    return reports


def _write_milstein_trajectory(config: ExperimentConfig, vf, y0) -> None:
    """One exemplar path: exact solution vs the 100-step scheme on its coarsening."""
    h, lam = _cells(config)[0]
    params = ModelParams(hurst=h, lam=lam, dim=1, horizon=config.horizon)
    n_coarse, n_fine = 100, 1000
    fine = simulate_paths(
        params, n_fine, 1, RngSpec(config.seed, stream=config.n_mc)
    )[0]
    coarse = fine.coarsen(n_fine // n_coarse)
    states = milstein_solve(vf, y0, lift_piecewise_linear(coarse), check_jacobian=False)
    driver = coarse.values[:, 0]
    exact = np.exp(driver - driver[0])
    rows = [
        (t, b, e, m)
        for t, b, e, m in zip(coarse.partition.times, driver, exact, states[:, 0])
    ]
    path = _sidecar(config.out, "trajectory")
    write_csv(path, config, "t,driver,exact,milstein", rows)
    print(f"wrote {path} ({len(rows)} rows, H={h:g} lambda={lam:g})")


# ---------------------------------------------------------------------------
# Signature features
# ---------------------------------------------------------------------------

def run_signature_features(config: ExperimentConfig) -> Dict[Cell, np.ndarray]:
    """(S1, S2) per path for each (H, lambda); CSV `H,lambda,path_id,S1,S2`.

    A per-cell moments sidecar (sample mean and covariance of (S1, S2))
    feeds the confidence-ellipse overlay of the plots component.
    """
    if len(config.resolutions) != 1:
        raise ConfigError(
            f"signature-features uses a single steps value, got {config.resolutions}"
        )
    if config.depth < 2:
        raise ConfigError("signature-features needs depth >= 2 for the S2 column")
    n_steps = config.resolutions[0]
    samples: Dict[Cell, np.ndarray] = {}
    rows: List[tuple] = []
    moment_rows: List[tuple] = []
    print(
        f"[signature-features] cells={len(_cells(config))} paths/cell={config.n_mc} "
        f"steps={n_steps}"
    )
    for h, lam in _cells(config):
        params = ModelParams(hurst=h, lam=lam, dim=1, horizon=config.horizon)
        params.require_lift()
        result = simulate_paths(params, n_steps, config.n_mc, RngSpec(config.seed))
        cell = np.empty((config.n_mc, 2))
        for p, path in enumerate(result):
            sig = signature_truncated(lift_piecewise_linear(path), config.depth)
            s1 = float(sig.level(1)[0])
            s2 = float(sig.level(2)[0, 0])
            cell[p] = (s1, s2)
            rows.append((h, lam, p, s1, s2))
        samples[(h, lam)] = cell
        mean = cell.mean(axis=0)
        cov = np.cov(cell, rowvar=False, ddof=1)
        moment_rows.append(
            (h, lam, config.n_mc, mean[0], mean[1], cov[0, 0], cov[0, 1], cov[1, 1])
        )
        se1 = float(np.sqrt(cov[0, 0] / config.n_mc))
        print(
            f"  H={h:g} lambda={lam:g}: mean S1={mean[0]:.4f} (stderr {se1:.4f}), "
            f"var S1={cov[0, 0]:.4f}, analytic C({config.horizon:g})="
            f"{variance(params, config.horizon):.4f}"
        )
    if config.out:
        write_csv(config.out, config, "H,lambda,path_id,S1,S2", rows)
        print(f"wrote {config.out}")
        moments_path = _sidecar(config.out, "moments")
        write_csv(
            moments_path,
            config,
            "H,lambda,n,mean_s1,mean_s2,cov11,cov12,cov22",
            moment_rows,
        )
        print(f"wrote {moments_path}")
    return samples


# ---------------------------------------------------------------------------
# Covariance verification
# ---------------------------------------------------------------------------

def run_covariance_check(config: ExperimentConfig):
    """Decomposition-bound violations plus rho-variation stabilization tables.

    Covariance-only: accepts any hurst in (0, 1), including H <= 1/4.
    Returns (decomposition reports, rho tables) keyed by (H, lambda).
    """
    n_intervals = config.resolutions[-1]
    grid = Partition.uniform(config.horizon, n_intervals)
    decomp = {}
    rho_tables: Dict[Cell, List[float]] = {}
    rows: List[tuple] = []
    depths = list(range(1, 9))
    print(f"[covariance-check] grid={n_intervals} intervals, T={config.horizon:g}")
    for h, lam in _cells(config):
        params = ModelParams(hurst=h, lam=lam, dim=1, horizon=config.horizon)
        report = verify_decomposition(params, grid)
        decomp[(h, lam)] = report
        print(
            f"  H={h:g} lambda={lam:g}: pairs={report.n_pairs} "
            f"violations={report.n_violations} max_excess={report.max_excess:.3e}"
        )
        rows.append((h, lam, report.n_pairs, report.n_violations, report.max_excess))
    print("  rho-variation stabilization (rho = max(1, 1/(2H))):")
    for h, lam in _cells(config):
        params = ModelParams(hurst=h, lam=lam, dim=1, horizon=config.horizon)
        rho = max(1.0, 1.0 / (2.0 * h))
        values = [
            rho_variation_sum(params, Partition.dyadic(config.horizon, d), rho)
            for d in depths
        ]
        rho_tables[(h, lam)] = values
        growth = values[-1] / values[-2] - 1.0
        print(
            f"  H={h:g} lambda={lam:g} rho={rho:.4f}: depth{depths[-1]}="
            f"{values[-1]:.6f} growth={100 * growth:.4f}%"
        )
    if config.out:
        write_csv(
            config.out, config, "H,lambda,pairs,violations,max_excess", rows
        )
        print(f"wrote {config.out}")
    return decomp, rho_tables


# ---------------------------------------------------------------------------
# rho-variation dyadic sweep
# ---------------------------------------------------------------------------

def run_rho_variation(config: ExperimentConfig) -> Dict[Cell, List[Tuple[int, float]]]:
    """rho-variation sums across dyadic depths; CSV `H,lambda,depth,rho,value`.

    `steps` holds the dyadic depths (default 1..10); rho is max(1, 1/(2H))
    per cell.
    """
    depths = list(config.resolutions)
    if depths[-1] > _MAX_RHO_DEPTH:
        raise ConfigError(
            f"dyadic depth {depths[-1]} too deep; maximum {_MAX_RHO_DEPTH}"
        )
    tables: Dict[Cell, List[Tuple[int, float]]] = {}
    rows: List[tuple] = []
    print(f"[rho-variation] depths={depths[0]}..{depths[-1]} T={config.horizon:g}")
    for h, lam in _cells(config):
        params = ModelParams(hurst=h, lam=lam, dim=1, horizon=config.horizon)
        rho = max(1.0, 1.0 / (2.0 * h))
        values = [
            (d, rho_variation_sum(params, Partition.dyadic(config.horizon, d), rho))
            for d in depths
        ]
        tables[(h, lam)] = values
        rows.extend((h, lam, d, rho, v) for d, v in values)
        if len(values) >= 2:
            growth = values[-1][1] / values[-2][1] - 1.0
            print(
                f"  H={h:g} lambda={lam:g} rho={rho:.4f}: last={values[-1][1]:.6f} "
                f"growth(depth {values[-2][0]}->{values[-1][0]})={100 * growth:.4f}%"
            )
        else:
            print(f"  H={h:g} lambda={lam:g} rho={rho:.4f}: value={values[-1][1]:.6f}")
    if config.out:
        write_csv(config.out, config, "H,lambda,depth,rho,value", rows)
        print(f"wrote {config.out}")
    return tables


# ---------------------------------------------------------------------------
# Path simulation dump
# ---------------------------------------------------------------------------

def run_simulate(config: ExperimentConfig) -> SimulationResult:
    """Simulate paths at one (H, lambda) and dump them (CSV or binary)."""
    if len(config.hurst) != 1 or len(config.lam) != 1:
        raise ConfigError("simulate takes exactly one hurst and one lambda value")
    if len(config.resolutions) != 1:
        raise ConfigError(f"simulate uses a single steps value, got {config.resolutions}")
    params = ModelParams(
        hurst=config.hurst[0], lam=config.lam[0], dim=config.dim,
        horizon=config.horizon,
    )
    result = simulate_paths(
        params, config.resolutions[0], config.n_mc, RngSpec(config.seed)
    )
    line = f"[simulate] method={result.method} fallback={result.fallback}"
    if result.embedding is not None:
        emb = result.embedding
        line += (
            f" embedding(size={emb.size} doublings={emb.n_doublings} "
            f"min_eig={emb.min_eigenvalue:.3e} clipped={emb.clipped_ratio:.3e})"
        )
    print(line)
    if config.out:
        if config.binary:
            with open(config.out, "wb") as fh:
                write_paths_binary(list(result), fh)
            print(f"wrote {config.out} ({len(result)} paths, binary)")
        else:
            targets = (
                [config.out]
                if len(result) == 1
                else [_sidecar(config.out, f"p{p}") for p in range(len(result))]
            )
            for path, target in zip(result, targets):
                with open(target, "w", encoding="utf-8", newline="") as fh:
                    for key, rendered in config.echo_items():
                        fh.write(f"# {key}={rendered}\n")
                    write_path_csv(path, fh)
            if len(targets) == 1:
                print(f"wrote {targets[0]}")
            else:
                print(f"wrote {targets[0]} .. {targets[-1]} ({len(targets)} files)")
    return result
