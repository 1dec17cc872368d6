import math

import numpy as np
import pytest

from npcloud.core import DispersionStats
from npcloud.encoding import (
    AdaptiveParams,
    AnchorGrid,
    EncodingConfig,
    adaptive_encode,
    adaptive_params,
    anchor_count,
    fourier_encode,
    hybrid_encode,
    modulate,
    sigmoid,
)
from npcloud.errors import DimOverflow, ShapeMismatch, SplitMismatch

from oracles import adaptive_encode_reference, fourier_encode_reference, modulate_reference


class TestAdaptiveParams:
    def test_blend_half_at_threshold(self):
        cfg = EncodingConfig(tau=0.3, kappa=10.0)
        params = adaptive_params(DispersionStats(0.3), cfg)
        assert params.blend == 0.5

    def test_sigma_at_zero_dispersion(self):
        cfg = EncodingConfig(sigma0=0.3)
        params = adaptive_params(DispersionStats(0.0), cfg)
        assert params.sigma_a == 0.3

    def test_blend_ten_over_kappa(self):
        cfg = EncodingConfig(tau=0.3, kappa=10.0)
        params = adaptive_params(DispersionStats(0.3 + 10.0 / 10.0), cfg)
        # frozen from 1 / (1 + exp(-10))
        assert params.blend == pytest.approx(0.9999546021312976, abs=1e-12)

    def test_fixed_overrides(self):
        cfg = EncodingConfig(fixed_sigma=0.5, fixed_blend=1.7)
        params = adaptive_params(DispersionStats(2.0), cfg)
        assert params.sigma_a == 0.5
        assert params.blend == 1.7

    def test_monotone_in_dispersion(self):
        cfg = EncodingConfig()
        rng = np.random.default_rng(0)
        sig = np.sort(rng.uniform(0.0, 2.0, size=1000))
        params = [adaptive_params(DispersionStats(s), cfg) for s in sig]
        sigmas = np.array([p.sigma_a for p in params])
        blends = np.array([p.blend for p in params])
        assert np.all(np.diff(sigmas) > 0)
        assert np.all(np.diff(blends) > 0)

    def test_sigmoid_extremes_safe(self):
        assert sigmoid(1000.0) == 1.0
        assert sigmoid(-1000.0) == 0.0
        assert sigmoid(0.0) == 0.5


class TestAnchorGrid:
    def test_regular_symmetric_increasing(self):
        for m in (1, 2, 3, 12, 24):
            grid = AnchorGrid.regular(m)
            vals = grid.values
            assert len(grid) == m
            if m > 1:
                assert np.all(np.diff(vals) > 0)
            np.testing.assert_allclose(vals, -vals[::-1], atol=1e-12)

    def test_anchor_count(self):
        assert anchor_count(3) == 1
        assert anchor_count(35) == 12
        assert anchor_count(36) == 12
        assert anchor_count(37) == 13


class TestAdaptiveEncode:
    def test_peak_at_anchor_is_one(self):
        grid = AnchorGrid.regular(5)
        rng = np.random.default_rng(1)
        for blend in np.concatenate([[0.0, 1.0, 0.5], rng.uniform(0, 1, 200)]):
            params = AdaptiveParams(sigma_a=0.4, blend=float(blend), eps=1e-6)
            x = np.array([[grid.values[2], grid.values[0], grid.values[4]]])
            out = adaptive_encode(x, params, grid, 15)
            assert out[0, 2] == 1.0
            assert out[0, 5] == 1.0
            assert out[0, 14] == 1.0

    def test_pure_gaussian_in_unit_interval(self):
        rng = np.random.default_rng(2)
        params = AdaptiveParams(sigma_a=0.4, blend=1.0, eps=1e-6)
        grid = AnchorGrid.regular(8)
        out = adaptive_encode(rng.uniform(-1, 1, size=(50, 3)), params, grid, 24)
        assert np.all(out > 0.0)
        assert np.all(out <= 1.0)

    def test_bounded(self):
        rng = np.random.default_rng(3)
        grid = AnchorGrid.regular(10)
        for _ in range(50):
            params = AdaptiveParams(
                sigma_a=float(rng.uniform(0.1, 1.5)),
                blend=float(rng.uniform(0, 1)),
                eps=1e-6,
            )
            out = adaptive_encode(rng.uniform(-2, 2, size=(20, 3)), params, grid, 30)
            assert np.all(np.abs(out) <= 1.0 + 1e-12)

    def test_matches_triple_loop_reference(self):
        rng = np.random.default_rng(4)
        grid = AnchorGrid.regular(12)
        params = AdaptiveParams(sigma_a=0.5, blend=0.3, eps=1e-6)
        rel = rng.uniform(-1.5, 1.5, size=(4, 3))
        got = adaptive_encode(rel, params, grid, 36)
        want = adaptive_encode_reference(rel, 0.5, 0.3, grid.values, 36)
        np.testing.assert_allclose(got, want, atol=1e-7)

    def test_blend_linearity(self):
        rng = np.random.default_rng(5)
        grid = AnchorGrid.regular(6)
        rel = rng.uniform(-1, 1, size=(10, 3))
        lo = adaptive_encode(rel, AdaptiveParams(0.4, 0.0), grid, 18)
        hi = adaptive_encode(rel, AdaptiveParams(0.4, 1.0), grid, 18)
        for blend in rng.uniform(0, 1, size=20):
            mid = adaptive_encode(rel, AdaptiveParams(0.4, float(blend)), grid, 18)
            np.testing.assert_allclose(mid, blend * hi + (1 - blend) * lo, atol=1e-9)

    def test_truncation_keeps_first_channels(self):
        rng = np.random.default_rng(6)
        grid = AnchorGrid.regular(4)
        params = AdaptiveParams(0.4, 0.7)
        rel = rng.uniform(-1, 1, size=(3, 3))
        full = adaptive_encode(rel, params, grid, 12)
        cut = adaptive_encode(rel, params, grid, 7)
        np.testing.assert_array_equal(cut, full[:, :7])

    def test_dim_overflow(self):
        with pytest.raises(DimOverflow):
            adaptive_encode(np.zeros((1, 3)), AdaptiveParams(0.3, 0.5), AnchorGrid.regular(2), 7)


class TestFourierEncode:
    def test_zero_input_layout(self):
        cfg = EncodingConfig(dim=24, mode="hybrid", fourier_l=2)
        out = fourier_encode(np.zeros((2, 3)), cfg, l=2)
        assert out.shape == (2, 12)
        np.testing.assert_array_equal(out[:, 0::2], np.zeros((2, 6)))
        np.testing.assert_array_equal(out[:, 1::2], np.ones((2, 6)))

    def test_range(self):
        rng = np.random.default_rng(7)
        cfg = EncodingConfig(dim=36, mode="hybrid", fourier_l=3)
        out = fourier_encode(rng.uniform(-10, 10, size=(30, 3)), cfg, l=3)
        assert np.all(np.abs(out) <= 1.0)

    def test_matches_scalar_reference(self):
        cfg = EncodingConfig(dim=48, mode="hybrid", fourier_l=4, alpha=100.0, beta=1000.0)
        rel = np.full((1, 3), 0.37)
        got = fourier_encode(rel, cfg, l=4)
        want = fourier_encode_reference(rel, 100.0, 1000.0, 4)
        np.testing.assert_allclose(got, want, atol=1e-9)
        # spot-check one channel by hand: axis x, j=1
        omega1 = 100.0 ** (1.0 / 4.0)
        assert got[0, 0] == pytest.approx(math.sin(1000.0 * 0.37 / omega1), abs=1e-9)


class TestHybridEncode:
    def test_segmentation_width(self):
        cfg = EncodingConfig(dim=144, mode="hybrid", fourier_l=12)
        params = AdaptiveParams(0.4, 0.6)
        out = hybrid_encode(np.zeros((5, 3)), params, cfg)
        assert out.shape == (5, 144)
        assert cfg.split(144) == (72, 72)

    def test_adaptive_only_width(self):
        cfg = EncodingConfig(dim=35, mode="adaptive")
        out = hybrid_encode(np.zeros((4, 3)), AdaptiveParams(0.4, 0.6), cfg)
        assert out.shape == (4, 35)

    def test_zero_row_structure(self):
        # dim=27, L=2 -> 12 Fourier + 15 adaptive channels (5 anchors/axis,
        # odd, so one anchor sits exactly at 0)
        cfg = EncodingConfig(dim=27, mode="hybrid", fourier_l=2)
        params = AdaptiveParams(0.4, 0.6)
        out = hybrid_encode(np.zeros((1, 3)), params, cfg)
        fourier, adaptive = out[0, :12], out[0, 12:]
        np.testing.assert_array_equal(fourier[0::2], np.zeros(6))
        np.testing.assert_array_equal(fourier[1::2], np.ones(6))
        grid = AnchorGrid.regular(anchor_count(15)).values
        peak = np.tile(grid == 0.0, 3)
        assert peak.sum() == 3
        assert np.all(adaptive[peak] == 1.0)
        assert np.all(adaptive[~peak] < 1.0)

    def test_split_scales_with_width(self):
        cfg = EncodingConfig(dim=144, mode="hybrid", fourier_l=12)
        assert cfg.split(288) == (144, 144)
        assert cfg.frequencies(288) == 24

    def test_default_split_is_half(self):
        cfg = EncodingConfig(dim=144, mode="hybrid")
        assert cfg.split(144) == (72, 72)

    def test_split_mismatch(self):
        with pytest.raises(SplitMismatch):
            EncodingConfig(dim=6, mode="hybrid", fourier_l=1)


class TestModulate:
    def test_zero_code_annihilates(self):
        h = np.random.default_rng(8).normal(size=(4, 6))
        np.testing.assert_array_equal(modulate(h, np.zeros_like(h)), np.zeros_like(h))

    def test_zero_features_square_code(self):
        p = np.random.default_rng(9).normal(size=(4, 6))
        np.testing.assert_allclose(modulate(np.zeros_like(p), p), p * p, atol=0)

    def test_matches_scalar_loop_exactly(self):
        rng = np.random.default_rng(10)
        h = rng.normal(size=(5, 7))
        p = rng.normal(size=(5, 7))
        np.testing.assert_array_equal(modulate(h, p), modulate_reference(h, p))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            modulate(np.zeros((2, 3)), np.zeros((2, 4)))


class TestDeterminism:
    def test_bit_identical_runs(self):
        rng = np.random.default_rng(11)
        rel = rng.uniform(-1, 1, size=(16, 3))
        cfg = EncodingConfig(dim=30, mode="hybrid", fourier_l=2)
        params = AdaptiveParams(0.37, 0.42)
        a = hybrid_encode(rel, params, cfg)
        b = hybrid_encode(rel, params, cfg)
        np.testing.assert_array_equal(a, b)

    def test_depends_on_rel_coords_only(self):
        # encoding sees only relative offsets: shifting the absolute frame
        # that produced them changes nothing by construction
        rng = np.random.default_rng(12)
        pts = rng.normal(size=(8, 3))
        center = pts[0]
        rel_a = pts - center
        shifted = pts + 5.0
        rel_b = shifted - shifted[0]
        cfg = EncodingConfig(dim=21)
        params = AdaptiveParams(0.4, 0.55)
        a = hybrid_encode(rel_a, params, cfg)
        b = hybrid_encode(rel_b, params, cfg)
        np.testing.assert_allclose(a, b, atol=1e-9)
