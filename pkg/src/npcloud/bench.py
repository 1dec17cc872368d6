"""Efficiency measurement: per-sample latency and peak host allocation.

Latency is the median over repetitions of (pass wall time / samples per
pass), after discarding warmup iterations; timing runs single-threaded so
ms/sample is meaningful. Peak allocation is tracked in a separate pass via
tracemalloc (CPython's instrumented allocator, which numpy buffers report
into), since the tracing hook itself slows execution.
"""

from __future__ import annotations

import time
import tracemalloc
from dataclasses import dataclass

from .config import PipelineConfig
from .encoder import encode_classification, encode_segmentation

WARMUP_ITERATIONS = 10


@dataclass(frozen=True)
class BenchResult:
    ms_per_sample: float
    peak_mb: float
    n_samples: int
    repetitions: int


def _median(values: list[float]) -> float:
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return ordered[mid]
    return 0.5 * (ordered[mid - 1] + ordered[mid])


def benchmark(
    cfg: PipelineConfig,
    clouds,
    repetitions: int = 5,
    task: str = "cls",
    warmup: int = WARMUP_ITERATIONS,
) -> BenchResult:
    """Measure encoding cost over the given clouds."""
    clouds = list(clouds)
    encode = encode_classification if task == "cls" else encode_segmentation

    for i in range(max(0, warmup)):
        encode(clouds[i % len(clouds)], cfg)

    per_pass = []
    for _ in range(repetitions):
        start = time.perf_counter()
        for cloud in clouds:
            encode(cloud, cfg)
        per_pass.append((time.perf_counter() - start) * 1000.0 / len(clouds))

    tracemalloc.start()
    try:
        for cloud in clouds:
            encode(cloud, cfg)
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()

    return BenchResult(
        ms_per_sample=_median(per_pass),
        peak_mb=peak / (1024.0 * 1024.0),
        n_samples=len(clouds),
        repetitions=repetitions,
    )
