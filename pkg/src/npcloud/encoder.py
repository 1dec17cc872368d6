"""Hierarchical feature extraction.

Each stage runs FPS -> kNN grouping -> positional modulation -> mean/max
pooling, doubling the feature width (stage t reduces N_{t-1} points of
width d*2^(t-1) to N_t centroids of width d*2^t). Classification pools the
whole pyramid into one L2-normalized global descriptor; segmentation walks
back down with inverse-distance interpolation to produce per-point rows.
The pipeline has no learned state: identical inputs give bit-identical
outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .core import PointCloud, canonicalize, global_dispersion
from .encoding import AdaptiveParams, EncodingConfig, adaptive_params, hybrid_encode
from .geom import fps, idw_interpolate, knn

IDW_NEIGHBORS = 3

# Centroid rows processed per block inside a stage (memory bound only;
# block size never changes computed values).
_BLOCK_ELEMS = 1 << 21


def _unit(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    return v if n == 0.0 else v / n


def _unit_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return m / norms


@dataclass(frozen=True)
class StageFeatures:
    """One pyramid level: point coordinates plus their feature rows."""

    points: np.ndarray
    features: np.ndarray


@dataclass(frozen=True)
class StagePyramid:
    """Level 0 is the input-resolution encoding; level t the t-th stage's
    centroids with pooled features of width d * 2^t."""

    levels: tuple[StageFeatures, ...]


@dataclass(frozen=True)
class GlobalDescriptor:
    """Concatenated per-stage summaries, L2-normalized."""

    vector: np.ndarray
    normalized: bool = True

    @property
    def dim(self) -> int:
        return self.vector.shape[0]


@dataclass(frozen=True)
class PointDescriptors:
    """Per-point rows at input resolution, L2-normalized."""

    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def stage_forward(
    points: np.ndarray,
    features: np.ndarray,
    n_centroids: int,
    k: int,
    params: AdaptiveParams,
    enc: EncodingConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """One stage block: FPS, kNN grouping, positional modulation, pooling.

    Returns (centroid coords (n_centroids, 3), pooled features of doubled
    width). Pooled row = [channel-wise max || channel-wise mean] over the k
    modulated neighbor rows.
    """
    width = features.shape[1]
    sel = fps(points, n_centroids).indices
    centers = points[sel]
    nbr = knn(centers, points, k)

    pooled = np.empty((n_centroids, 2 * width))
    block = max(1, _BLOCK_ELEMS // max(1, k * width))
    for start in range(0, n_centroids, block):
        stop = min(start + block, n_centroids)
        rel = points[nbr[start:stop]] - centers[start:stop, None, :]
        code = hybrid_encode(rel, params, enc, width=width)
        mod = (features[nbr[start:stop]] + code) * code
        pooled[start:stop, :width] = mod.max(axis=1)
        pooled[start:stop, width:] = mod.mean(axis=1)
    return centers, pooled


def cloud_params(cloud: PointCloud, cfg: PipelineConfig) -> tuple[PointCloud, AdaptiveParams]:
    """Canonicalize and derive the per-cloud encoding parameters (computed
    once from the whole cloud, shared by every stage)."""
    canon = canonicalize(cloud, scale=cfg.normalize_scale)
    params = adaptive_params(global_dispersion(canon), cfg.encoding)
    return canon, params


def build_pyramid(cloud: PointCloud, cfg: PipelineConfig) -> StagePyramid:
    """Run every stage, keeping each level's points and features."""
    canon, params = cloud_params(cloud, cfg)
    enc = cfg.encoding
    pts = canon.coords
    feats = hybrid_encode(pts, params, enc, width=enc.dim)
    levels = [StageFeatures(points=pts, features=feats)]
    for n_t in cfg.stages.schedule(canon.n):
        pts, feats = stage_forward(pts, feats, n_t, cfg.stages.k, params, enc)
        levels.append(StageFeatures(points=pts, features=feats))
    return StagePyramid(levels=tuple(levels))


def encode_classification(cloud: PointCloud, cfg: PipelineConfig) -> GlobalDescriptor:
    """Global shape descriptor: per stage, [max || mean] over centroids of
    the pooled features, each summary L2-normalized, concatenated, and
    normalized once more."""
    pyramid = build_pyramid(cloud, cfg)
    summaries = []
    for level in pyramid.levels[1:]:
        f = level.features
        summaries.append(_unit(np.concatenate([f.max(axis=0), f.mean(axis=0)])))
    return GlobalDescriptor(vector=_unit(np.concatenate(summaries)))


def encode_segmentation(cloud: PointCloud, cfg: PipelineConfig) -> PointDescriptors:
    """Per-point descriptors via the encoder pyramid plus an IDW decoder.

    Coarse features are interpolated to each finer level and concatenated
    with that level's encoder features until input resolution is restored;
    rows are L2-normalized so dot products equal cosine similarity.
    """
    pyramid = build_pyramid(cloud, cfg)
    levels = pyramid.levels
    h = levels[-1].features
    for t in range(len(levels) - 2, -1, -1):
        interp = idw_interpolate(
            levels[t].points, levels[t + 1].points, h, k=IDW_NEIGHBORS
        )
        h = np.concatenate([interp, levels[t].features], axis=1)
    return PointDescriptors(matrix=_unit_rows(h))
