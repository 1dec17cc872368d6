"""Fundamental data types and cloud preprocessing.

A :class:`PointCloud` is an immutable N x 3 coordinate array with optional
per-point part labels and an optional shape category. All downstream
operators assume clouds have been passed through :func:`canonicalize`,
which centers the centroid at the origin and (by default) rescales so the
farthest point sits on the unit sphere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCloud, NonFiniteInput, ShapeMismatch

_DEGENERATE_RADIUS = 1e-12


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PointCloud:
    """Immutable point set.

    coords   -- (N, 3) float64 coordinates, N >= 1, all finite
    labels   -- optional (N,) int64 per-point part labels
    category -- optional shape category id
    """

    coords: np.ndarray
    labels: np.ndarray | None = None
    category: int | None = None

    def __post_init__(self):
        coords = np.ascontiguousarray(np.asarray(self.coords, dtype=np.float64))
        if coords.ndim != 2 or coords.shape[1] != 3:
            raise ShapeMismatch(f"coords must be (N, 3), got {coords.shape}")
        if coords.shape[0] == 0:
            raise EmptyCloud("point cloud has no points")
        if not np.all(np.isfinite(coords)):
            raise NonFiniteInput("coordinates contain NaN or Inf")
        object.__setattr__(self, "coords", _freeze(coords))
        if self.labels is not None:
            labels = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int64))
            if labels.shape != (coords.shape[0],):
                raise ShapeMismatch(
                    f"labels must be ({coords.shape[0]},), got {labels.shape}"
                )
            object.__setattr__(self, "labels", _freeze(labels))
        if self.category is not None:
            object.__setattr__(self, "category", int(self.category))

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def with_coords(self, coords: np.ndarray) -> "PointCloud":
        """Same labels/category over new coordinates."""
        return PointCloud(coords, labels=self.labels, category=self.category)


@dataclass(frozen=True)
class DispersionStats:
    """Global dispersion of a cloud: mean of the three per-axis standard
    deviations (population convention). Zero iff all points coincide."""

    sigma_g: float


@dataclass(frozen=True)
class Labels:
    """Class id with its one-hot expansion over C classes."""

    class_id: int
    one_hot: np.ndarray = field(repr=False)

    def __post_init__(self):
        one_hot = np.asarray(self.one_hot, dtype=np.float64)
        if one_hot.ndim != 1 or one_hot.sum() != 1.0:
            raise ShapeMismatch("one_hot must be a 1-D vector with a single 1")
        object.__setattr__(self, "one_hot", _freeze(one_hot))

    @classmethod
    def from_class_id(cls, class_id: int, num_classes: int) -> "Labels":
        one_hot = np.zeros(num_classes)
        one_hot[class_id] = 1.0
        return cls(class_id=int(class_id), one_hot=one_hot)


def canonicalize(cloud: PointCloud, scale: bool = True) -> PointCloud:
    """Center the centroid at the origin and rescale so max ||x|| = 1.

    A cloud whose points all coincide collapses to all-zero coordinates.
    With ``scale=False`` only the centering step is applied, leaving the
    cloud's native extent visible to the adaptive encoding (used by the
    fixed-vs-adaptive ablations).
    """
    coords = cloud.coords - cloud.coords.mean(axis=0)
    if scale:
        radius = float(np.sqrt((coords * coords).sum(axis=1).max()))
        if radius < _DEGENERATE_RADIUS:
            coords = np.zeros_like(coords)
        else:
            coords = coords / radius
    return cloud.with_coords(coords)


def global_dispersion(cloud: PointCloud) -> DispersionStats:
    """Mean per-axis population standard deviation of the coordinates."""
    return DispersionStats(sigma_g=float(cloud.coords.std(axis=0).mean()))
