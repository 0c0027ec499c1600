"""Validation tests for exact tfBm path simulation.

Tests cover:
  1. Increment autocovariance: definition, Brownian limit, tempered decay.
  2. SamplePath invariants and coarsening.
  3. Circulant-embedding simulation: determinism, embedding metadata,
     single-step variance, entrywise Gram agreement at Monte Carlo rate.
  4. Cholesky oracle: cross-method distributional agreement (KS),
     normality in the Brownian limit, non-uniform grids.
  5. Forced fallback: embedding failure flips the metadata flag and the
     output law is still correct.
  6. CSV/binary path dumps round-trip.
"""

import io

import numpy as np
import pytest
from scipy import stats

from temprough import (
    DomainError,
    ModelParams,
    Partition,
    RngSpec,
    SamplePath,
    covariance_grid,
    increment_autocovariance,
    increment_autocovariance_seq,
    simulate_paths,
    simulate_paths_cholesky,
    variance,
    write_path_csv,
    write_paths_binary,
)
import temprough.simulate as simulate_module


# ---------------------------------------------------------------------------
# Increment autocovariance
# ---------------------------------------------------------------------------

class TestIncrementAutocovariance:
    """gamma(k) = Cov of increments k steps apart."""

    def test_lag_zero_is_increment_variance(self) -> None:
        params = ModelParams(hurst=0.4, lam=1.0)
        got = increment_autocovariance(params, 0.1, 0)
        assert got == pytest.approx(variance(params, 0.1), rel=1e-12)
        assert got > 0.0

    @pytest.mark.parametrize("lag", [1, 2, 7])
    def test_brownian_limit_uncorrelated(self, lag: int) -> None:
        params = ModelParams(hurst=0.5, lam=1e-9)
        got = increment_autocovariance(params, 0.25, lag)
        assert abs(got) < 1e-8

    def test_tempered_decay(self) -> None:
        # correlations die once the lag extends well past 1/lambda
        params = ModelParams(hurst=0.4, lam=1.0)
        gamma_far = abs(increment_autocovariance(params, 1.0, 45))
        print(f"  |gamma(45)| at step 1, lam=1: {gamma_far:.3e}")
        assert gamma_far < 1e-12

    def test_sequence_matches_scalar(self) -> None:
        params = ModelParams(hurst=0.65, lam=2.0)
        seq = increment_autocovariance_seq(params, 0.125, 20)
        scalars = [increment_autocovariance(params, 0.125, k) for k in range(21)]
        assert np.allclose(seq, scalars, rtol=1e-13, atol=0.0)

    def test_nonpositive_step_rejected(self) -> None:
        with pytest.raises(DomainError):
            increment_autocovariance(ModelParams(hurst=0.4, lam=1.0), 0.0, 1)


# ---------------------------------------------------------------------------
# SamplePath
# ---------------------------------------------------------------------------

class TestSamplePath:
    """Shape and start-at-zero invariants, increments, coarsening."""

    def _path(self) -> SamplePath:
        part = Partition.uniform(1.0, 8)
        values = np.zeros((9, 2))
        values[1:] = np.cumsum(np.ones((8, 2)) * 0.1, axis=0)
        return SamplePath(ModelParams(hurst=0.4, lam=1.0, dim=2), part, values)

    def test_nonzero_start_rejected(self) -> None:
        part = Partition.uniform(1.0, 2)
        values = np.full((3, 1), 0.5)
        with pytest.raises(DomainError):
            SamplePath(ModelParams(hurst=0.4, lam=1.0), part, values)

    def test_shape_mismatch_rejected(self) -> None:
        part = Partition.uniform(1.0, 4)
        with pytest.raises(DomainError):
            SamplePath(ModelParams(hurst=0.4, lam=1.0), part, np.zeros((3, 1)))

    def test_increments_and_coarsen(self) -> None:
        path = self._path()
        assert np.allclose(path.increments(), 0.1)
        coarse = path.coarsen(4)
        assert coarse.n_steps == 2
        assert np.allclose(coarse.values, path.values[::4])
        with pytest.raises(DomainError):
            path.coarsen(3)  # does not divide 8


# ---------------------------------------------------------------------------
# Circulant-embedding simulation
# ---------------------------------------------------------------------------

class TestSimulatePaths:
    """Exactness and determinism of the FFT sampler."""

    def test_bit_identical_determinism(self) -> None:
        params = ModelParams(hurst=0.4, lam=1.0, dim=2)
        a = simulate_paths(params, 32, 3, RngSpec(seed=42))
        b = simulate_paths(params, 32, 3, RngSpec(seed=42))
        for pa, pb in zip(a, b):
            assert np.array_equal(pa.values, pb.values)
        c = simulate_paths(params, 32, 3, RngSpec(seed=43))
        assert not np.array_equal(a[0].values, c[0].values)

    def test_embedding_metadata(self) -> None:
        params = ModelParams(hurst=0.4, lam=1.0)
        result = simulate_paths(params, 64, 2, RngSpec(seed=1))
        emb = result.embedding
        print(f"  method={result.method} size={emb.size} "
              f"doublings={emb.n_doublings} min_eig={emb.min_eigenvalue:.3e}")
        assert result.method == "circulant"
        assert not result.fallback
        assert emb.valid and emb.size >= 128
        assert emb.clipped_ratio <= 1e-8

    def test_single_step_variance(self) -> None:
        params = ModelParams(hurst=0.35, lam=1.0)
        n = 100_000
        result = simulate_paths(params, 1, n, RngSpec(seed=7))
        terminal = np.array([p.values[1, 0] for p in result])
        target = variance(params, 1.0)
        est = terminal.var()
        se = target * np.sqrt(2.0 / (n - 1))
        print(f"  var {est:.6f} vs analytic {target:.6f} "
              f"({abs(est - target) / se:.2f} SE)")
        assert abs(est - target) < 3.0 * se

    @pytest.mark.parametrize("hurst,lam", [(0.3, 1.0), (0.6, 10.0)])
    def test_gram_matrix_entrywise(self, hurst: float, lam: float) -> None:
        params = ModelParams(hurst=hurst, lam=lam)
        n_paths, n_steps = 20_000, 16
        result = simulate_paths(params, n_steps, n_paths, RngSpec(seed=11))
        values = np.stack([p.values[1:, 0] for p in result])
        empirical = values.T @ values / n_paths
        times = result[0].partition.times[1:]
        analytic = covariance_grid(params, times)
        # Var(X_i X_j) = R_ii R_jj + R_ij^2 for joint Gaussians
        se = np.sqrt((np.outer(np.diag(analytic), np.diag(analytic))
                      + analytic ** 2) / n_paths)
        dev = np.abs(empirical - analytic) / se
        print(f"  H={hurst} lam={lam}: worst entry {dev.max():.2f} SE")
        assert dev.max() < 4.0


# ---------------------------------------------------------------------------
# Cholesky oracle and cross-method agreement
# ---------------------------------------------------------------------------

class TestCholeskyOracle:
    """Dense-Cholesky reference sampler."""

    def test_determinism_and_metadata(self) -> None:
        params = ModelParams(hurst=0.45, lam=1.0)
        a = simulate_paths_cholesky(params, 16, 2, RngSpec(seed=3))
        b = simulate_paths_cholesky(params, 16, 2, RngSpec(seed=3))
        assert np.array_equal(a[0].values, b[0].values)
        assert a.method == "cholesky" and not a.fallback

    @pytest.mark.parametrize("hurst,lam", [(0.4, 1.0), (0.7, 0.5)])
    def test_two_sample_terminal_agreement(self, hurst: float, lam: float) -> None:
        params = ModelParams(hurst=hurst, lam=lam)
        n = 10_000
        circ = simulate_paths(params, 64, n, RngSpec(seed=21))
        chol = simulate_paths_cholesky(params, 64, n, RngSpec(seed=22))
        t_circ = np.array([p.values[-1, 0] for p in circ])
        t_chol = np.array([p.values[-1, 0] for p in chol])
        stat, pvalue = stats.ks_2samp(t_circ, t_chol)
        print(f"  H={hurst} lam={lam}: KS stat {stat:.4f}, p={pvalue:.3f}")
        assert pvalue > 0.01

    def test_brownian_limit_increment_normality(self) -> None:
        params = ModelParams(hurst=0.5, lam=1e-8)
        result = simulate_paths_cholesky(params, 64, 200, RngSpec(seed=5))
        increments = np.concatenate([np.diff(p.values[:, 0]) for p in result])
        scale = np.sqrt(variance(params, 1.0 / 64.0))
        stat, pvalue = stats.kstest(increments / scale, "norm")
        print(f"  KS vs standard normal: stat {stat:.4f}, p={pvalue:.3f}")
        assert pvalue > 0.01

    def test_explicit_nonuniform_partition(self) -> None:
        params = ModelParams(hurst=0.6, lam=1.0)
        part = Partition((0.0, 0.1, 0.15, 0.6, 1.0))
        n = 20_000
        result = simulate_paths_cholesky(params, 4, n, RngSpec(seed=9),
                                         partition=part)
        values = np.stack([p.values[1:, 0] for p in result])
        empirical = values.T @ values / n
        analytic = covariance_grid(params, part.times[1:])
        se = np.sqrt((np.outer(np.diag(analytic), np.diag(analytic))
                      + analytic ** 2) / n)
        dev = np.abs(empirical - analytic) / se
        print(f"  nonuniform grid: worst entry {dev.max():.2f} SE")
        assert dev.max() < 4.0


class TestFallback:
    """A failed embedding falls back to Cholesky and flags it."""

    def test_forced_fallback_flag_and_law(self, monkeypatch) -> None:
        params = ModelParams(hurst=0.4, lam=1.0)
        real = simulate_module._try_embedding

        def always_invalid(p, step, n_steps):
            _, report = real(p, step, n_steps)
            broken = simulate_module.EmbeddingReport(
                size=report.size, n_doublings=report.n_doublings,
                min_eigenvalue=report.min_eigenvalue,
                max_eigenvalue=report.max_eigenvalue,
                clipped_ratio=report.clipped_ratio, valid=False)
            return None, broken

        monkeypatch.setattr(simulate_module, "_try_embedding", always_invalid)
        with pytest.warns(UserWarning):
            result = simulate_paths(params, 8, 4000, RngSpec(seed=13))
        assert result.method == "cholesky"
        assert result.fallback
        assert result.embedding is not None and not result.embedding.valid
        terminal = np.array([p.values[-1, 0] for p in result])
        target = variance(params, 1.0)
        se = target * np.sqrt(2.0 / (len(terminal) - 1))
        assert abs(terminal.var() - target) < 4.0 * se

    def test_increment_stationarity(self) -> None:
        # lag-1 increment covariance estimated from two different starting
        # indices agrees within Monte Carlo noise
        params = ModelParams(hurst=0.35, lam=1.0)
        n = 20_000
        result = simulate_paths(params, 8, n, RngSpec(seed=17))
        inc = np.stack([np.diff(p.values[:, 0]) for p in result])
        cov_a = np.mean(inc[:, 0] * inc[:, 1])
        cov_b = np.mean(inc[:, 5] * inc[:, 6])
        pooled_se = np.sqrt((np.var(inc[:, 0] * inc[:, 1])
                             + np.var(inc[:, 5] * inc[:, 6])) / n)
        print(f"  lag-1 cov at i=0: {cov_a:.6f}, at i=5: {cov_b:.6f} "
              f"({abs(cov_a - cov_b) / pooled_se:.2f} SE)")
        assert abs(cov_a - cov_b) < 4.0 * pooled_se


# ---------------------------------------------------------------------------
# Dumps
# ---------------------------------------------------------------------------

class TestDumps:
    """CSV and binary serialization of sample paths."""

    def test_csv_header_and_rows(self) -> None:
        params = ModelParams(hurst=0.4, lam=1.0, dim=2)
        path = simulate_paths(params, 4, 1, RngSpec(seed=2))[0]
        buffer = io.StringIO()
        write_path_csv(path, buffer)
        lines = buffer.getvalue().strip().split("\n")
        assert lines[0] == "t,comp0,comp1"
        assert len(lines) == 6
        first = [float(x) for x in lines[1].split(",")]
        assert first == [0.0, 0.0, 0.0]

    def test_binary_roundtrip(self) -> None:
        params = ModelParams(hurst=0.4, lam=1.0, dim=2)
        paths = list(simulate_paths(params, 4, 3, RngSpec(seed=2)))
        buffer = io.BytesIO()
        write_paths_binary(paths, buffer)
        raw = np.frombuffer(buffer.getvalue(), dtype="<f8")
        table = raw.reshape(3 * 5, 3)
        for k, path in enumerate(paths):
            block = table[k * 5:(k + 1) * 5]
            assert np.array_equal(block[:, 0], path.partition.times)
            assert np.array_equal(block[:, 1:], path.values)
