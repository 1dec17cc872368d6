"""Analytic per-sample FLOP estimate.

Counting convention (documented here and echoed into reports):

* fused multiply-add = 2 FLOPs, plain add/sub/mul/div = 1
* transcendental evaluation (exp, cos, sin, sqrt) = 1 FLOP
* comparison (min/max/sort step) = 1 FLOP
* a squared 3-D distance = 3 sub + 3 mul + 2 add = 8 FLOPs

Component formulas, per stage t with N_src source points, N_t centroids,
k neighbors and incoming width w (so k*w modulated elements per centroid):

* fps        : N_t * N_src * (8 dist + 1 min-update + 1 argmax)
* knn        : N_t * N_src * (8 dist + ceil(log2 N_src) sort comparisons)
* encoding   : adaptive channel = 11 FLOPs (scale 2, bump 2+1, cos 1+1,
               blend 4); Fourier channel = 2 (phase mul + sin/cos);
               channels = N_t * k * w
* modulation : 2 FLOPs per element ((H+P) then *P)
* pooling    : 2 FLOPs per element (max compare + mean add)
* summary    : classification stage summary max/mean over centroids plus
               normalization, 2 * N_t * 2w + 6w
* decoder    : segmentation IDW per fine point: k-NN against the coarse
               level plus k * (sqrt + reciprocal + 2 normalize/apply) per
               feature-weighted sum of width w

The published efficiency tables for methods of this family use an
unstated (profiler-specific) convention and land orders of magnitude
below any full arithmetic count, so absolute parity is not claimed; the
estimate's purpose is the cost *trend* in d, k, and stage depth, which is
exact under any linear convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import PipelineConfig

_ADAPTIVE_PER_CHANNEL = 11
_FOURIER_PER_CHANNEL = 2
_DIST3 = 8


@dataclass(frozen=True)
class FlopEstimate:
    total: int
    by_component: dict[str, int]

    @property
    def gflops(self) -> float:
        return self.total / 1e9


def _encode_cost(cfg: PipelineConfig, positions: int, width: int) -> int:
    fourier_ch, adaptive_ch = cfg.encoding.split(width)
    per_pos = fourier_ch * _FOURIER_PER_CHANNEL + adaptive_ch * _ADAPTIVE_PER_CHANNEL
    return positions * per_pos


def estimate_flops(cfg: PipelineConfig, task: str = "cls") -> FlopEstimate:
    """Analytic per-sample cost of encoding one cloud under ``cfg``.

    ``task`` selects the classification summary path or the segmentation
    decoder on top of the shared stage pipeline.
    """
    n = cfg.stages.points
    d = cfg.encoding.dim
    k = cfg.stages.k
    schedule = cfg.stages.schedule(n)

    comp = {key: 0 for key in ("fps", "knn", "encoding", "modulation", "pooling", "summary", "decoder")}
    comp["encoding"] += _encode_cost(cfg, n, d)

    n_src, width = n, d
    for n_t in schedule:
        k_eff = min(k, n_src)
        comp["fps"] += n_t * n_src * (_DIST3 + 2)
        comp["knn"] += n_t * n_src * (_DIST3 + max(1, math.ceil(math.log2(n_src))))
        elements = n_t * k_eff * width
        comp["encoding"] += _encode_cost(cfg, n_t * k_eff, width)
        comp["modulation"] += 2 * elements
        comp["pooling"] += 2 * elements
        width *= 2
        if task == "cls":
            comp["summary"] += 2 * n_t * width + 6 * width
        n_src = n_t

    if task == "seg":
        # walk back up: fine level sizes are the reversed schedule plus N
        levels = [n] + list(schedule)
        h_width = d * 2 ** len(schedule)
        for t in range(len(levels) - 2, -1, -1):
            fine, coarse = levels[t], levels[t + 1]
            comp["decoder"] += fine * coarse * (_DIST3 + max(1, math.ceil(math.log2(coarse))))
            comp["decoder"] += fine * 3 * (2 + 2 * h_width)  # 3 IDW neighbors
            h_width += d * 2**t
        comp["summary"] += n * (3 * h_width)  # final row normalization

    total = sum(comp.values())
    return FlopEstimate(total=total, by_component=comp)


def formula_sheet() -> str:
    """Human-readable counting convention, embedded into reports."""
    return __doc__.strip()
