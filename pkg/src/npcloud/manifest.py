"""Dataset manifests.

A manifest is a JSON file describing a local dataset: task kind, target
point count, the class or category/part tables, and the train/test split
as sample file references. Loaders attach the manifest's class/category id
to each cloud; per-point labels come from the sample files themselves.

Classification manifest:

    {"task": "cls", "points": 1024,
     "class_names": ["airplane", ...],
     "train": [{"path": "train/a_0.xyz", "class": 0}, ...],
     "test":  [...]}

Segmentation manifest:

    {"task": "seg", "points": 1024,
     "categories": [{"name": "airplane", "parts": [0, 1, 2, 3]}, ...],
     "train": [{"path": "train/a_0.npc", "category": 0}, ...],
     "test":  [...]}
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .core import PointCloud
from .errors import ManifestError
from .formats import load_sample
from .parallel import worker_map

TASK_CLS = "cls"
TASK_SEG = "seg"


@dataclass(frozen=True)
class SampleRef:
    path: str
    label: int


@dataclass(frozen=True)
class CategoryDef:
    name: str
    parts: tuple[int, ...]


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    task: str
    points: int
    class_names: tuple[str, ...]
    categories: tuple[CategoryDef, ...]
    train: tuple[SampleRef, ...]
    test: tuple[SampleRef, ...]

    @property
    def num_classes(self) -> int:
        return len(self.class_names) if self.task == TASK_CLS else len(self.categories)

    def category_parts(self) -> dict[int, tuple[int, ...]]:
        return {i: c.parts for i, c in enumerate(self.categories)}

    def split(self, name: str) -> tuple[SampleRef, ...]:
        if name == "train":
            return self.train
        if name == "test":
            return self.test
        raise ManifestError(f"unknown split {name!r}")

    def load_split(
        self, name: str, n_points: int | None = None, workers: int | None = None
    ) -> list[PointCloud]:
        """Load every sample of a split, resampled to the manifest's point
        count (or an explicit override), with the split label attached."""
        target = self.points if n_points is None else n_points

        def _load(ref: SampleRef) -> PointCloud:
            cloud = load_sample(self.root / ref.path, n_points=target)
            return PointCloud(cloud.coords, labels=cloud.labels, category=ref.label)

        return worker_map(_load, self.split(name), workers)


def _parse_refs(entries, key: str, limit: int, where: str) -> tuple[SampleRef, ...]:
    refs = []
    for i, entry in enumerate(entries):
        if key not in entry or "path" not in entry:
            raise ManifestError(f"{where}[{i}]: needs 'path' and '{key}'")
        label = int(entry[key])
        if label < 0 or label >= limit:
            raise ManifestError(f"{where}[{i}]: {key} {label} outside [0, {limit})")
        refs.append(SampleRef(path=str(entry["path"]), label=label))
    return tuple(refs)


def load_manifest(path) -> DatasetManifest:
    """Parse and validate a manifest; every referenced file must exist."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON ({exc})") from None
    task = data.get("task")
    if task not in (TASK_CLS, TASK_SEG):
        raise ManifestError(f"{path}: task must be 'cls' or 'seg', got {task!r}")
    points = int(data.get("points", 0))
    if points < 1:
        raise ManifestError(f"{path}: 'points' must be a positive integer")

    class_names: tuple[str, ...] = ()
    categories: tuple[CategoryDef, ...] = ()
    if task == TASK_CLS:
        class_names = tuple(str(n) for n in data.get("class_names", ()))
        if not class_names:
            raise ManifestError(f"{path}: classification manifest needs 'class_names'")
        limit, key = len(class_names), "class"
    else:
        cats = data.get("categories", ())
        if not cats:
            raise ManifestError(f"{path}: segmentation manifest needs 'categories'")
        categories = tuple(
            CategoryDef(name=str(c["name"]), parts=tuple(int(p) for p in c["parts"]))
            for c in cats
        )
        limit, key = len(categories), "category"

    manifest = DatasetManifest(
        root=path.parent,
        task=task,
        points=points,
        class_names=class_names,
        categories=categories,
        train=_parse_refs(data.get("train", ()), key, limit, "train"),
        test=_parse_refs(data.get("test", ()), key, limit, "test"),
    )
    for ref in manifest.train + manifest.test:
        if not (manifest.root / ref.path).is_file():
            raise ManifestError(f"{path}: missing sample file {ref.path}")
    return manifest


def dataset_digest(manifest: DatasetManifest) -> str:
    """16-hex-char digest over the manifest structure and every referenced
    sample file's content."""
    h = hashlib.sha256()
    h.update(
        json.dumps(
            {
                "task": manifest.task,
                "points": manifest.points,
                "class_names": manifest.class_names,
                "categories": [(c.name, c.parts) for c in manifest.categories],
                "train": [(r.path, r.label) for r in manifest.train],
                "test": [(r.path, r.label) for r in manifest.test],
            },
            sort_keys=True,
            default=list,
        ).encode()
    )
    for ref in manifest.train + manifest.test:
        h.update((manifest.root / ref.path).read_bytes())
    return h.hexdigest()[:16]


def write_manifest(
    path,
    task: str,
    points: int,
    train: list[tuple[str, int]],
    test: list[tuple[str, int]],
    class_names=None,
    categories=None,
) -> None:
    """Emit a manifest JSON next to already-written sample files."""
    key = "class" if task == TASK_CLS else "category"
    data: dict = {"task": task, "points": points}
    if task == TASK_CLS:
        data["class_names"] = list(class_names or ())
    else:
        data["categories"] = [{"name": n, "parts": list(p)} for n, p in (categories or ())]
    data["train"] = [{"path": p, key: c} for p, c in train]
    data["test"] = [{"path": p, key: c} for p, c in test]
    Path(path).write_text(json.dumps(data, indent=2) + "\n")
