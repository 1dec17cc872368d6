import numpy as np
import pytest

from npcloud.core import PointCloud, canonicalize, global_dispersion
from npcloud.errors import EmptyCloud, NonFiniteInput

from oracles import std_two_pass


class TestPointCloud:
    def test_rejects_empty(self):
        with pytest.raises(EmptyCloud):
            PointCloud(np.zeros((0, 3)))

    def test_rejects_nonfinite(self):
        bad = np.array([[0.0, 0.0, np.nan]])
        with pytest.raises(NonFiniteInput):
            PointCloud(bad)
        with pytest.raises(NonFiniteInput):
            PointCloud(np.array([[np.inf, 0.0, 0.0]]))

    def test_immutable(self):
        cloud = PointCloud(np.ones((4, 3)))
        with pytest.raises(ValueError):
            cloud.coords[0, 0] = 5.0

    def test_labels_and_category_pass_through(self):
        cloud = PointCloud(np.ones((3, 3)), labels=[0, 1, 1], category=7)
        out = canonicalize(cloud)
        assert out.category == 7
        assert np.array_equal(out.labels, [0, 1, 1])


class TestCanonicalize:
    def test_symmetric_two_point(self):
        cloud = PointCloud([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
        out = canonicalize(cloud)
        np.testing.assert_allclose(out.coords, [[-1, 0, 0], [1, 0, 0]], atol=1e-12)

    def test_degenerate_repeated_point(self):
        cloud = PointCloud(np.full((4, 3), 5.0))
        out = canonicalize(cloud)
        assert np.array_equal(out.coords, np.zeros((4, 3)))

    def test_random_cloud_centered_unit(self):
        rng = np.random.default_rng(0)
        out = canonicalize(PointCloud(rng.uniform(-3, 9, size=(100, 3))))
        assert np.abs(out.coords.mean(axis=0)).max() < 1e-6
        assert abs(np.linalg.norm(out.coords, axis=1).max() - 1.0) < 1e-6

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        once = canonicalize(PointCloud(rng.normal(size=(50, 3))))
        twice = canonicalize(once)
        np.testing.assert_allclose(twice.coords, once.coords, atol=1e-9)

    def test_scale_disabled_keeps_extent(self):
        coords = np.array([[0.0, 0.0, 0.0], [4.0, 0.0, 0.0]])
        out = canonicalize(PointCloud(coords), scale=False)
        np.testing.assert_allclose(out.coords, [[-2, 0, 0], [2, 0, 0]], atol=1e-12)


class TestGlobalDispersion:
    def test_identical_points_zero(self):
        assert global_dispersion(PointCloud(np.full((5, 3), 2.0))).sigma_g == 0.0

    def test_two_point_hand_value(self):
        cloud = PointCloud([[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        assert global_dispersion(cloud).sigma_g == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_matches_two_pass_oracle(self):
        rng = np.random.default_rng(2)
        coords = rng.uniform(-1, 1, size=(1000, 3))
        expected = sum(std_two_pass(coords[:, i]) for i in range(3)) / 3.0
        got = global_dispersion(PointCloud(coords)).sigma_g
        assert got == pytest.approx(expected, abs=1e-9)

    def test_translation_invariant(self):
        rng = np.random.default_rng(3)
        coords = rng.normal(size=(200, 3))
        base = global_dispersion(PointCloud(coords)).sigma_g
        for t in ([1.0, -2.0, 0.5], [100.0, 100.0, 100.0]):
            shifted = global_dispersion(PointCloud(coords + np.asarray(t))).sigma_g
            assert shifted == pytest.approx(base, abs=1e-9)

    def test_scales_linearly(self):
        rng = np.random.default_rng(4)
        coords = rng.normal(size=(200, 3))
        base = global_dispersion(PointCloud(coords)).sigma_g
        for a in (0.25, 3.0, -2.0):
            scaled = global_dispersion(PointCloud(a * coords)).sigma_g
            assert scaled == pytest.approx(abs(a) * base, rel=1e-9)

    def test_single_point_zero(self):
        assert global_dispersion(PointCloud([[1.0, 2.0, 3.0]])).sigma_g == 0.0
