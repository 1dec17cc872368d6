"""Pipeline configuration: stage schedule, encoding settings, inference
temperature, and the digest that ties banks to the encoder that built them."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

from .encoding import MODE_ADAPTIVE, MODE_HYBRID, EncodingConfig
from .errors import SplitMismatch, TooFewPoints


@dataclass(frozen=True)
class StageConfig:
    """Hierarchy shape: stage count, neighbors per centroid, target point
    count, and an optional explicit centroid schedule (default N / 2^t)."""

    stages: int = 4
    k: int = 110
    points: int = 1024
    centroid_schedule: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.stages < 1:
            raise SplitMismatch(f"need at least one stage, got {self.stages}")
        if self.k < 1:
            raise SplitMismatch(f"k must be >= 1, got {self.k}")
        if self.centroid_schedule is not None:
            sched = tuple(int(v) for v in self.centroid_schedule)
            if len(sched) != self.stages:
                raise SplitMismatch(
                    f"schedule length {len(sched)} != stages {self.stages}"
                )
            if any(a <= b for a, b in zip(sched, sched[1:])) or sched[-1] < 1:
                raise SplitMismatch("centroid schedule must be strictly decreasing, >= 1")
            object.__setattr__(self, "centroid_schedule", sched)

    def schedule(self, n: int) -> tuple[int, ...]:
        """Centroid counts per stage for an n-point cloud."""
        if self.centroid_schedule is not None:
            if self.centroid_schedule[0] > n:
                raise TooFewPoints(
                    f"cloud has {n} points, schedule starts at {self.centroid_schedule[0]}"
                )
            return self.centroid_schedule
        if n < 2**self.stages:
            raise TooFewPoints(
                f"cloud has {n} points, {self.stages} halving stages need >= {2 ** self.stages}"
            )
        return tuple(n // 2**t for t in range(1, self.stages + 1))


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the engine needs to turn a cloud into a descriptor and
    match it against a bank."""

    encoding: EncodingConfig = field(default_factory=EncodingConfig)
    stages: StageConfig = field(default_factory=StageConfig)
    gamma: float = 100.0
    normalize_scale: bool = True
    seed: int = 0

    def digest(self) -> str:
        """16-hex-char digest over every field that shapes descriptors.

        gamma and seed are query-time knobs and deliberately excluded, so a
        bank stays valid across temperature changes.
        """
        payload = {
            "encoding": asdict(self.encoding),
            "stages": asdict(self.stages),
            "normalize_scale": self.normalize_scale,
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def replace(self, **kwargs) -> "PipelineConfig":
        return replace(self, **kwargs)


def modelnet40_config() -> PipelineConfig:
    """Classification defaults: d=35, k=110, 4 stages, 1024 points."""
    return PipelineConfig(
        encoding=EncodingConfig(dim=35, mode=MODE_ADAPTIVE),
        stages=StageConfig(stages=4, k=110, points=1024),
    )


def scanobjectnn_config() -> PipelineConfig:
    """Real-scan classification defaults: d=27, k=120, 4 stages."""
    return PipelineConfig(
        encoding=EncodingConfig(dim=27, mode=MODE_ADAPTIVE),
        stages=StageConfig(stages=4, k=120, points=1024),
    )


def shapenetpart_config() -> PipelineConfig:
    """Part segmentation defaults: d=144 hybrid, k=70, 2 stages."""
    return PipelineConfig(
        encoding=EncodingConfig(dim=144, mode=MODE_HYBRID),
        stages=StageConfig(stages=2, k=70, points=1024),
    )
