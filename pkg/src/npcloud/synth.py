"""Synthetic shape generators.

Sphere / cube / cylinder surface samples for classification smoke tests,
and two displaced spheres with part labels for segmentation. Every
generator is seeded and jitters its shape parameters per sample so train
and test splits differ by more than sampling noise.
"""

from __future__ import annotations

import numpy as np

from .core import PointCloud

CLS_CLASS_NAMES = ("sphere", "cube", "cylinder")
SEG_CATEGORY_NAME = "twospheres"
SEG_PARTS = (0, 1)


def sphere_points(n: int, rng: np.random.Generator, radius: float = 1.0) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return radius * v


def cube_points(n: int, rng: np.random.Generator, half: float = 1.0) -> np.ndarray:
    """Uniform samples on the surface of an axis-aligned cube."""
    face = rng.integers(0, 6, size=n)
    uv = rng.uniform(-half, half, size=(n, 2))
    pts = np.empty((n, 3))
    axis = face // 2
    sign = np.where(face % 2 == 0, half, -half)
    for a in range(3):
        rows = axis == a
        others = [b for b in range(3) if b != a]
        pts[rows, a] = sign[rows]
        pts[rows, others[0]] = uv[rows, 0]
        pts[rows, others[1]] = uv[rows, 1]
    return pts


def cylinder_points(
    n: int, rng: np.random.Generator, radius: float = 0.5, height: float = 2.0
) -> np.ndarray:
    """Uniform samples on a closed cylinder (side and both caps,
    area-weighted)."""
    side_area = 2.0 * np.pi * radius * height
    cap_area = np.pi * radius**2
    p_side = side_area / (side_area + 2.0 * cap_area)
    on_side = rng.uniform(size=n) < p_side
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    pts = np.empty((n, 3))

    z = rng.uniform(-height / 2.0, height / 2.0, size=n)
    pts[on_side, 0] = radius * np.cos(theta[on_side])
    pts[on_side, 1] = radius * np.sin(theta[on_side])
    pts[on_side, 2] = z[on_side]

    caps = ~on_side
    r = radius * np.sqrt(rng.uniform(size=n))
    top = rng.uniform(size=n) < 0.5
    pts[caps, 0] = r[caps] * np.cos(theta[caps])
    pts[caps, 1] = r[caps] * np.sin(theta[caps])
    pts[caps, 2] = np.where(top[caps], height / 2.0, -height / 2.0)
    return pts


def two_sphere_points(
    n: int,
    rng: np.random.Generator,
    gap: float = 0.6,
    radius: float = 0.45,
) -> tuple[np.ndarray, np.ndarray]:
    """Two spheres displaced along x; labels 0 (left) and 1 (right)."""
    n_left = n // 2
    left = sphere_points(n_left, rng, radius) + np.array([-gap, 0.0, 0.0])
    right = sphere_points(n - n_left, rng, radius) + np.array([gap, 0.0, 0.0])
    coords = np.concatenate([left, right])
    labels = np.concatenate([np.zeros(n_left, dtype=np.int64), np.ones(n - n_left, dtype=np.int64)])
    return coords, labels


def classification_cloud(
    class_id: int,
    n: int,
    rng: np.random.Generator,
    scale_range: tuple[float, float] | None = None,
) -> PointCloud:
    """One jittered sample of the given class, optionally scaled by a
    per-shape uniform factor."""
    if class_id == 0:
        coords = sphere_points(n, rng, radius=rng.uniform(0.8, 1.0))
    elif class_id == 1:
        coords = cube_points(n, rng, half=rng.uniform(0.7, 0.9))
    elif class_id == 2:
        coords = cylinder_points(
            n, rng, radius=rng.uniform(0.25, 0.35), height=rng.uniform(1.8, 2.2)
        )
    else:
        raise ValueError(f"class_id must be 0..2, got {class_id}")
    if scale_range is not None:
        coords = coords * rng.uniform(*scale_range)
    return PointCloud(coords, category=class_id)


def make_classification_set(
    per_class: int,
    n_points: int,
    seed: int = 0,
    scale_range: tuple[float, float] | None = None,
) -> list[PointCloud]:
    """per_class samples of each of sphere/cube/cylinder, interleaved."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(per_class):
        for class_id in range(len(CLS_CLASS_NAMES)):
            out.append(classification_cloud(class_id, n_points, rng, scale_range))
    return out


def make_segmentation_set(count: int, n_points: int, seed: int = 0) -> list[PointCloud]:
    """Two-displaced-spheres shapes with per-point part labels."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        coords, labels = two_sphere_points(
            n_points,
            rng,
            gap=rng.uniform(0.55, 0.7),
            radius=rng.uniform(0.35, 0.45),
        )
        out.append(PointCloud(coords, labels=labels, category=0))
    return out
