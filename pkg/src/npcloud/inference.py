"""Training-free fit and predict.

A single pass over the training shapes builds a memory bank of normalized
descriptors (classification) or per-shape part prototypes (segmentation).
Prediction is softmax-weighted similarity voting against the bank: for a
unit query f, similarities s = f^T F give weights w = softmax(gamma * s)
and the class/part vote z = w^T Y. All tie-breaks take the smallest index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import PipelineConfig
from .core import PointCloud
from .encoder import (
    GlobalDescriptor,
    PointDescriptors,
    encode_classification,
    encode_segmentation,
)
from .errors import (
    ClassOutOfRange,
    DimMismatch,
    EmptyTrainingSet,
    InsufficientPool,
    UnknownCategory,
)
from .parallel import worker_map


def softmax(scores: np.ndarray, axis: int = -1) -> np.ndarray:
    """Stable softmax in float64."""
    z = np.asarray(scores, dtype=np.float64)
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


@dataclass(frozen=True)
class Prediction:
    """Predicted label with its per-class vote vector (nonnegative, sums
    to 1); label is always the argmax with smallest-index tie-break."""

    label: int
    scores: np.ndarray


@dataclass(frozen=True)
class ClsBank:
    """Classification memory: F is (D, M) with unit columns, one column per
    training shape in input order; Y is the (M, C) one-hot label matrix."""

    descriptors: np.ndarray
    labels_onehot: np.ndarray
    gamma: float
    class_names: tuple[str, ...]
    config_digest: str = ""

    @property
    def dim(self) -> int:
        return self.descriptors.shape[0]

    @property
    def size(self) -> int:
        return self.descriptors.shape[1]

    @property
    def num_classes(self) -> int:
        return self.labels_onehot.shape[1]

    @property
    def class_ids(self) -> np.ndarray:
        return self.labels_onehot.argmax(axis=1)


@dataclass(frozen=True)
class CategoryPrototypes:
    """One category's prototype rows (unit norm), the global part id of
    each row, and the category's valid part ids."""

    prototypes: np.ndarray
    part_ids: np.ndarray
    valid_parts: np.ndarray


@dataclass(frozen=True)
class SegBank:
    """Per-category part prototypes; one prototype per (training shape,
    part present in that shape)."""

    categories: dict[int, CategoryPrototypes] = field(default_factory=dict)
    gamma: float = 100.0
    config_digest: str = ""
    skipped_parts: int = 0


def _require_category(cloud: PointCloud, what: str) -> int:
    if cloud.category is None:
        raise ClassOutOfRange(f"{what} requires clouds with a category id")
    return cloud.category


def build_cls_bank(
    shapes,
    cfg: PipelineConfig,
    class_names=None,
    workers: int | None = None,
) -> ClsBank:
    """Encode every training shape once and stack the normalized descriptors.

    ``shapes`` is a sequence of PointCloud whose ``category`` is the class
    id. Column order equals input order.
    """
    shapes = list(shapes)
    if not shapes:
        raise EmptyTrainingSet("no training shapes")
    ids = [_require_category(c, "build_cls_bank") for c in shapes]
    if class_names is not None:
        names = tuple(str(n) for n in class_names)
    else:
        names = tuple(f"class_{i}" for i in range(max(ids) + 1))
    c = len(names)
    bad = [i for i in ids if i < 0 or i >= c]
    if bad:
        raise ClassOutOfRange(f"class id {bad[0]} outside [0, {c})")

    descs = worker_map(lambda s: encode_classification(s, cfg).vector, shapes, workers)
    f = np.stack(descs, axis=1).astype(np.float32)
    y = np.zeros((len(shapes), c), dtype=np.float32)
    y[np.arange(len(shapes)), ids] = 1.0
    return ClsBank(
        descriptors=f,
        labels_onehot=y,
        gamma=cfg.gamma,
        class_names=names,
        config_digest=cfg.digest(),
    )


def classify(bank: ClsBank, descriptor) -> Prediction:
    """Softmax-weighted vote of the bank columns for one query descriptor."""
    f = descriptor.vector if isinstance(descriptor, GlobalDescriptor) else np.asarray(descriptor)
    if f.shape != (bank.dim,):
        raise DimMismatch(f"descriptor shape {f.shape} != bank dim ({bank.dim},)")
    s = f.astype(np.float64) @ bank.descriptors.astype(np.float64)
    w = softmax(bank.gamma * s)
    z = w @ bank.labels_onehot.astype(np.float64)
    return Prediction(label=int(z.argmax()), scores=z)


def build_seg_bank(
    shapes,
    cfg: PipelineConfig,
    category_parts: dict[int, tuple[int, ...]] | None = None,
    proto_keep: float = 1.0,
    workers: int | None = None,
) -> SegBank:
    """Per-shape, per-part prototypes grouped by category.

    Each prototype is the L2-normalized mean of one part's per-point
    descriptors within one training shape. Labels outside the category's
    declared part set are skipped and counted. ``proto_keep`` < 1 retains a
    seeded random fraction of each category's prototypes.
    """
    shapes = list(shapes)
    if not shapes:
        raise EmptyTrainingSet("no training shapes")
    for cloud in shapes:
        cat = _require_category(cloud, "build_seg_bank")
        if cloud.labels is None:
            raise ClassOutOfRange("build_seg_bank requires per-point labels")
        if category_parts is not None and cat not in category_parts:
            raise UnknownCategory(f"category {cat} not in the declared table")

    descs = worker_map(lambda s: encode_segmentation(s, cfg).matrix, shapes, workers)

    rows: dict[int, list[np.ndarray]] = {}
    parts: dict[int, list[int]] = {}
    skipped = 0
    for cloud, mat in zip(shapes, descs):
        cat = cloud.category
        allowed = set(category_parts[cat]) if category_parts is not None else None
        for p in np.unique(cloud.labels):
            p = int(p)
            if allowed is not None and p not in allowed:
                skipped += 1
                continue
            proto = mat[cloud.labels == p].mean(axis=0)
            norm = float(np.linalg.norm(proto))
            if norm > 0.0:
                proto = proto / norm
            rows.setdefault(cat, []).append(proto.astype(np.float32))
            parts.setdefault(cat, []).append(p)

    categories: dict[int, CategoryPrototypes] = {}
    rng = np.random.default_rng(cfg.seed)
    for cat in sorted(rows):
        protos = np.stack(rows[cat])
        ids = np.asarray(parts[cat], dtype=np.int64)
        if proto_keep < 1.0:
            keep = max(1, int(np.ceil(proto_keep * len(ids))))
            sel = np.sort(rng.choice(len(ids), size=keep, replace=False))
            protos, ids = protos[sel], ids[sel]
        if category_parts is not None:
            valid = np.asarray(sorted(category_parts[cat]), dtype=np.int64)
        else:
            valid = np.unique(ids)
        categories[cat] = CategoryPrototypes(
            prototypes=protos, part_ids=ids, valid_parts=valid
        )
    return SegBank(
        categories=categories,
        gamma=cfg.gamma,
        config_digest=cfg.digest(),
        skipped_parts=skipped,
    )


@dataclass(frozen=True)
class PartPrediction:
    """Per-point part assignment: global part ids, plus the vote matrix
    over the category's valid parts (rows sum to 1)."""

    labels: np.ndarray
    scores: np.ndarray
    parts: np.ndarray


def segment(bank: SegBank, category: int, descriptors) -> PartPrediction:
    """Per-point softmax vote restricted to one category's prototypes."""
    if category not in bank.categories:
        raise UnknownCategory(f"category {category} not in bank")
    entry = bank.categories[category]
    x = descriptors.matrix if isinstance(descriptors, PointDescriptors) else np.asarray(descriptors)
    if x.shape[1] != entry.prototypes.shape[1]:
        raise DimMismatch(
            f"descriptor width {x.shape[1]} != prototype width {entry.prototypes.shape[1]}"
        )
    s = x.astype(np.float64) @ entry.prototypes.astype(np.float64).T
    w = softmax(bank.gamma * s, axis=1)
    local = np.searchsorted(entry.valid_parts, entry.part_ids)
    y = np.zeros((entry.part_ids.shape[0], entry.valid_parts.shape[0]))
    y[np.arange(entry.part_ids.shape[0]), local] = 1.0
    z = w @ y
    return PartPrediction(
        labels=entry.valid_parts[z.argmax(axis=1)],
        scores=z,
        parts=entry.valid_parts.copy(),
    )


def evaluate_classification(
    bank: ClsBank, shapes, cfg: PipelineConfig, workers: int | None = None
) -> float:
    """Overall accuracy = correct / total over the given shapes."""
    shapes = list(shapes)
    if not shapes:
        return 0.0
    preds = worker_map(
        lambda s: classify(bank, encode_classification(s, cfg)).label, shapes, workers
    )
    truth = [_require_category(s, "evaluate_classification") for s in shapes]
    return float(np.mean([p == t for p, t in zip(preds, truth)]))


def shape_iou(pred: np.ndarray, truth: np.ndarray, parts) -> float:
    """Mean IoU over a shape's valid parts; a part absent from both the
    prediction and the truth counts as IoU 1."""
    scores = []
    for p in parts:
        a = pred == p
        b = truth == p
        union = int(np.logical_or(a, b).sum())
        if union == 0:
            scores.append(1.0)
        else:
            scores.append(float(np.logical_and(a, b).sum()) / union)
    return float(np.mean(scores))


def evaluate_segmentation(
    bank: SegBank, shapes, cfg: PipelineConfig, workers: int | None = None
) -> float:
    """Instance mIoU: per-shape mean IoU over its category's valid parts,
    averaged over shapes."""
    shapes = list(shapes)
    if not shapes:
        return 0.0

    def _one(cloud: PointCloud) -> float:
        cat = _require_category(cloud, "evaluate_segmentation")
        pred = segment(bank, cat, encode_segmentation(cloud, cfg))
        return shape_iou(pred.labels, cloud.labels, bank.categories[cat].valid_parts)

    return float(np.mean(worker_map(_one, shapes, workers)))


def fewshot_episode(
    pool,
    ways: int,
    shots: int,
    queries: int,
    cfg: PipelineConfig,
    seed: int = 0,
    workers: int | None = None,
) -> float:
    """One N-way K-shot episode: sample classes and shapes, build a bank
    from the support set only, return query accuracy. Identical (pool,
    seed) always produces the identical episode."""
    pool = list(pool)
    by_class: dict[int, list[int]] = {}
    for i, cloud in enumerate(pool):
        by_class.setdefault(_require_category(cloud, "fewshot_episode"), []).append(i)
    eligible = sorted(c for c, members in by_class.items() if len(members) >= shots + queries)
    if len(eligible) < ways:
        raise InsufficientPool(
            f"{ways}-way needs {ways} classes with >= {shots + queries} shapes, "
            f"have {len(eligible)}"
        )
    rng = np.random.default_rng(seed)
    classes = sorted(rng.choice(eligible, size=ways, replace=False).tolist())

    support, query = [], []
    for local, cat in enumerate(classes):
        chosen = rng.choice(by_class[cat], size=shots + queries, replace=False)
        for i in chosen[:shots]:
            support.append(PointCloud(pool[i].coords, labels=pool[i].labels, category=local))
        for i in chosen[shots:]:
            query.append(PointCloud(pool[i].coords, labels=pool[i].labels, category=local))

    bank = build_cls_bank(support, cfg, workers=workers)
    return evaluate_classification(bank, query, cfg, workers=workers)
