"""Deterministic geometric kernels.

Farthest point sampling, exact k-nearest neighbors, neighborhood grouping
with relative coordinates, and inverse-distance-weighted interpolation.
Everything is a pure function over immutable inputs; all tie-breaks are
deterministic (distance, then lexicographic coordinates, then index), so
two runs on the same input are bit-identical and the selection is
permutation-invariant whenever pairwise distances are distinct.

Squared distances are used wherever only the ordering matters; true
distances only enter the IDW weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PointCloud
from .errors import BadCount, BadK, EmptyCoarse, ShapeMismatch

# IDW constants: denominator stabilizer and the exact-match shortcut radius.
IDW_EPS = 1e-8
IDW_EXACT = 1e-10

# Upper bound on elements of a distance-matrix chunk (memory control only;
# chunking does not change any computed value).
_CHUNK_ELEMS = 1 << 22


def _as_coords(points) -> np.ndarray:
    coords = points.coords if isinstance(points, PointCloud) else np.asarray(points)
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != 3:
        raise ShapeMismatch(f"expected (N, 3) coordinates, got {coords.shape}")
    return coords


@dataclass(frozen=True)
class IndexSet:
    """Ordered indices into a source cloud."""

    indices: np.ndarray

    def __post_init__(self):
        idx = np.ascontiguousarray(np.asarray(self.indices, dtype=np.int64))
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return self.indices.shape[0]


@dataclass(frozen=True)
class Neighborhood:
    """One center with its k gathered neighbors.

    rel_coords row j equals coords[neighbor_indices[j]] - coords[center_index];
    the center may appear as its own neighbor.
    """

    center_index: int
    neighbor_indices: np.ndarray
    rel_coords: np.ndarray


def _pick_with_tiebreak(scores: np.ndarray, coords: np.ndarray) -> int:
    """Index of the max score; ties resolved by lexicographically smallest
    coordinates, then smallest index."""
    best = int(np.argmax(scores))
    if np.count_nonzero(scores == scores[best]) == 1:
        return best
    cand = np.flatnonzero(scores == scores[best])
    sub = coords[cand]
    order = np.lexsort((cand, sub[:, 2], sub[:, 1], sub[:, 0]))
    return int(cand[order[0]])


def fps(points, n: int) -> IndexSet:
    """Greedy farthest point sampling.

    The seed is the point farthest from the cloud centroid (equal to the
    max-norm point once clouds are canonicalized, and translation-invariant
    either way); every later pick maximizes the minimum distance to the
    already-selected set. Output order is selection order.
    """
    coords = _as_coords(points)
    total = coords.shape[0]
    if n < 1 or n > total:
        raise BadCount(f"sample count {n} outside [1, {total}]")

    selected = np.empty(n, dtype=np.int64)
    centered = coords - coords.mean(axis=0)
    current = _pick_with_tiebreak((centered * centered).sum(axis=1), coords)
    selected[0] = current

    # selected points are parked at -1 so exact duplicates of them (min
    # distance 0) can never re-select an already-chosen index
    min_d2 = np.full(total, np.inf)
    for i in range(1, n):
        diff = coords - coords[current]
        np.minimum(min_d2, (diff * diff).sum(axis=1), out=min_d2)
        min_d2[current] = -1.0
        current = _pick_with_tiebreak(min_d2, coords)
        selected[i] = current
    return IndexSet(selected)


def knn(queries, base, k: int) -> np.ndarray:
    """Exact k-nearest neighbors of each query among the base points.

    Returns a (Q, k) int64 array; each row is sorted by (distance, index).
    When k exceeds the base size, the last neighbor index is repeated to
    keep a fixed row length.
    """
    if k < 1:
        raise BadK(f"k must be >= 1, got {k}")
    q = _as_coords(queries)
    b = _as_coords(base)
    total = b.shape[0]
    k_eff = min(k, total)

    rows = max(1, _CHUNK_ELEMS // max(1, total))
    out = np.empty((q.shape[0], k_eff), dtype=np.int64)
    for start in range(0, q.shape[0], rows):
        stop = min(start + rows, q.shape[0])
        diff = q[start:stop, None, :] - b[None, :, :]
        d2 = (diff * diff).sum(axis=2)
        out[start:stop] = _smallest_k(d2, k_eff)
    if k_eff < k:
        pad = np.repeat(out[:, -1:], k - k_eff, axis=1)
        out = np.concatenate([out, pad], axis=1)
    return out


def _smallest_k(d2: np.ndarray, k: int) -> np.ndarray:
    """Per-row indices of the k smallest values, ordered by (value, index).

    Partition + in-window sort on the fast path; rows whose k-th distance
    ties with an excluded value fall back to a full stable sort so the
    smallest-index rule holds exactly."""
    n = d2.shape[1]
    if k >= n:
        return np.argsort(d2, axis=1, kind="stable")[:, :k]
    part = np.argpartition(d2, kth=k - 1, axis=1)[:, :k]
    pd = np.take_along_axis(d2, part, axis=1)
    order = np.lexsort((part, pd), axis=1)
    idx = np.take_along_axis(part, order, axis=1)
    boundary = np.take_along_axis(pd, order[:, -1:], axis=1)
    ambiguous = (d2 == boundary).sum(axis=1) > (pd == boundary).sum(axis=1)
    if np.any(ambiguous):
        idx[ambiguous] = np.argsort(d2[ambiguous], axis=1, kind="stable")[:, :k]
    return idx


def neighbor_distances(queries, base, neighbor_idx: np.ndarray) -> np.ndarray:
    """Euclidean distances matching a knn() index array, row by row."""
    q = _as_coords(queries)
    b = _as_coords(base)
    diff = b[neighbor_idx] - q[:, None, :]
    return np.sqrt((diff * diff).sum(axis=2))


def group(cloud: PointCloud, centers, k: int, features: np.ndarray):
    """Gather each center's k-NN neighborhood and its feature block.

    Returns a list of (Neighborhood, (k, d) feature block) pairs, one per
    center, in center order.
    """
    coords = cloud.coords
    features = np.asarray(features)
    if features.shape[0] != coords.shape[0]:
        raise ShapeMismatch(
            f"features rows {features.shape[0]} != cloud size {coords.shape[0]}"
        )
    center_idx = centers.indices if isinstance(centers, IndexSet) else np.asarray(
        centers, dtype=np.int64
    )
    nbr = knn(coords[center_idx], coords, k)
    rel = coords[nbr] - coords[center_idx][:, None, :]
    out = []
    for row, c in enumerate(center_idx):
        hood = Neighborhood(
            center_index=int(c),
            neighbor_indices=nbr[row].copy(),
            rel_coords=rel[row].copy(),
        )
        out.append((hood, features[nbr[row]]))
    return out


def idw_interpolate(
    fine,
    coarse,
    coarse_feats: np.ndarray,
    k: int = 3,
    eps: float = IDW_EPS,
    exact: float = IDW_EXACT,
) -> np.ndarray:
    """Inverse-distance-weighted feature propagation from coarse to fine.

    Each fine point receives the weighted average of its k nearest coarse
    features with weights proportional to 1 / (distance + eps), normalized
    to sum to one. A fine point within ``exact`` of a coarse point copies
    that coarse feature verbatim.
    """
    f = _as_coords(fine)
    c = _as_coords(coarse)
    if c.shape[0] == 0:
        raise EmptyCoarse("no coarse points to interpolate from")
    if k < 1:
        raise BadK(f"k must be >= 1, got {k}")
    feats = np.asarray(coarse_feats, dtype=np.float64)
    if feats.shape[0] != c.shape[0]:
        raise ShapeMismatch(
            f"coarse_feats rows {feats.shape[0]} != coarse size {c.shape[0]}"
        )
    k_eff = min(k, c.shape[0])
    nbr = knn(f, c, k_eff)
    dist = neighbor_distances(f, c, nbr)

    w = 1.0 / (dist + eps)
    w /= w.sum(axis=1, keepdims=True)
    out = np.einsum("fk,fkd->fd", w, feats[nbr])

    hit = dist[:, 0] < exact
    if np.any(hit):
        out[hit] = feats[nbr[hit, 0]]
    return out
