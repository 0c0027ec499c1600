"""Validation tests for model parameters, partitions, and RNG specs.

Tests cover:
  1. ModelParams: domain validation, the lift precondition, with_ updates.
  2. Partition: monotonicity, mesh, uniform/dyadic constructors.
  3. RngSpec: bit-for-bit determinism and substream independence.
"""

import numpy as np
import pytest

from temprough import DomainError, ModelParams, Partition, RngSpec


# ---------------------------------------------------------------------------
# ModelParams
# ---------------------------------------------------------------------------

class TestModelParams:
    """Domain checks on (hurst, lambda, dim, horizon)."""

    @pytest.mark.parametrize("hurst", [0.05, 0.3, 0.5, 0.7, 0.95])
    def test_valid_hurst_accepted(self, hurst: float) -> None:
        params = ModelParams(hurst=hurst, lam=1.0)
        assert params.hurst == hurst

    @pytest.mark.parametrize("hurst", [0.0, 1.0, -0.3, 1.7])
    def test_hurst_out_of_range_rejected(self, hurst: float) -> None:
        with pytest.raises(DomainError):
            ModelParams(hurst=hurst, lam=1.0)

    @pytest.mark.parametrize("lam", [0.0, -1.0])
    def test_nonpositive_lambda_rejected(self, lam: float) -> None:
        with pytest.raises(DomainError):
            ModelParams(hurst=0.4, lam=lam)

    def test_bad_dim_and_horizon_rejected(self) -> None:
        with pytest.raises(DomainError):
            ModelParams(hurst=0.4, lam=1.0, dim=0)
        with pytest.raises(DomainError):
            ModelParams(hurst=0.4, lam=1.0, horizon=0.0)

    @pytest.mark.parametrize("hurst,ok", [(0.2, False), (0.25, False),
                                          (0.26, True), (0.7, True)])
    def test_lift_needs_hurst_above_quarter(self, hurst: float, ok: bool) -> None:
        params = ModelParams(hurst=hurst, lam=1.0)
        if ok:
            params.require_lift()
        else:
            with pytest.raises(DomainError):
                params.require_lift()

    def test_with_replaces_fields(self) -> None:
        params = ModelParams(hurst=0.4, lam=1.0, dim=2, horizon=2.0)
        changed = params.with_(hurst=0.6, lam=0.1)
        assert (changed.hurst, changed.lam) == (0.6, 0.1)
        assert (changed.dim, changed.horizon) == (2, 2.0)
        assert (params.hurst, params.lam) == (0.4, 1.0)  # original untouched


# ---------------------------------------------------------------------------
# Partition
# ---------------------------------------------------------------------------

class TestPartition:
    """Grid invariants: start at 0, strict monotonicity, derived mesh."""

    def test_basic_properties(self) -> None:
        part = Partition((0.0, 0.2, 0.5, 1.0))
        assert part.end == 1.0
        assert part.n_intervals == 3
        assert part.mesh == pytest.approx(0.5)
        assert np.allclose(part.deltas, [0.2, 0.3, 0.5])

    @pytest.mark.parametrize("times", [
        (0.5, 1.0),            # does not start at 0
        (0.0, 0.5, 0.5, 1.0),  # repeated time
        (0.0, 0.7, 0.4),       # decreasing
        (0.0,),                # single point
    ])
    def test_invalid_grids_rejected(self, times) -> None:
        with pytest.raises(DomainError):
            Partition(tuple(times))

    def test_uniform_constructor(self) -> None:
        part = Partition.uniform(2.0, 4)
        assert np.allclose(part.times, [0.0, 0.5, 1.0, 1.5, 2.0])
        assert part.mesh == pytest.approx(0.5)

    @pytest.mark.parametrize("depth", [1, 3, 6])
    def test_dyadic_constructor(self, depth: int) -> None:
        part = Partition.dyadic(1.0, depth)
        assert part.n_intervals == 2 ** depth
        assert part.mesh == pytest.approx(2.0 ** -depth)


# ---------------------------------------------------------------------------
# RngSpec
# ---------------------------------------------------------------------------

class TestRngSpec:
    """Counter-based substreams: reproducible and mutually independent."""

    def test_identical_spec_identical_draws(self) -> None:
        a = RngSpec(seed=123, stream=4).generator().standard_normal(64)
        b = RngSpec(seed=123, stream=4).generator().standard_normal(64)
        assert np.array_equal(a, b)

    def test_different_streams_differ(self) -> None:
        a = RngSpec(seed=123, stream=0).generator().standard_normal(64)
        b = RngSpec(seed=123, stream=1).generator().standard_normal(64)
        assert not np.array_equal(a, b)

    def test_substream_offsets(self) -> None:
        spec = RngSpec(seed=7, stream=2)
        shifted = spec.substream(3)
        assert shifted.stream == 5 and shifted.seed == 7
        direct = RngSpec(seed=7, stream=5).generator().standard_normal(8)
        assert np.array_equal(shifted.generator().standard_normal(8), direct)

    def test_substream_correlation_small(self) -> None:
        n = 4000
        draws = np.stack(
            [RngSpec(seed=99, stream=s).generator().standard_normal(n)
             for s in range(4)]
        )
        corr = np.corrcoef(draws)
        off = corr[~np.eye(4, dtype=bool)]
        print(f"  max |cross-stream corr| = {np.abs(off).max():.4f}")
        assert np.abs(off).max() < 4.0 / np.sqrt(n)
