"""Sample file formats.

Two on-disk representations of a point cloud:

* XYZ text -- one ``x y z [label]`` line per point, ASCII, ``#`` comments
  and blank lines ignored. Values are written with 9 significant digits.
* NPC1 packed binary -- little-endian: magic ``NPC1``, u32 point count,
  u8 has_labels, u8 has_category, N x 3 float32 coordinates, optional
  N x u16 labels, optional u16 category.

Loading can resample to a target point count: larger clouds are subsampled
deterministically with farthest point sampling, smaller ones are an error.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import PointCloud
from .errors import ParseError, TooFewPoints
from .geom import fps

MAGIC_SAMPLE = b"NPC1"
_HEADER = struct.Struct("<4sIBB")

XYZ_FORMAT = "xyz"
PACKED_FORMAT = "npc1"


def _resample(cloud: PointCloud, n_points: int | None, path: Path) -> PointCloud:
    if n_points is None or cloud.n == n_points:
        return cloud
    if cloud.n < n_points:
        raise TooFewPoints(f"{path}: has {cloud.n} points, need {n_points}")
    keep = fps(cloud, n_points).indices
    labels = cloud.labels[keep] if cloud.labels is not None else None
    return PointCloud(cloud.coords[keep], labels=labels, category=cloud.category)


def _parse_xyz(raw: bytes, path: Path) -> PointCloud:
    coords: list[tuple[float, float, float]] = []
    labels: list[int] = []
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not ASCII text ({exc})") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        fields = body.split()
        if len(fields) not in (3, 4):
            raise ParseError(f"{path}: line {lineno}: expected 3 or 4 fields, got {len(fields)}")
        try:
            x, y, z = (float(v) for v in fields[:3])
        except ValueError:
            raise ParseError(f"{path}: line {lineno}: non-numeric coordinate") from None
        if len(fields) == 4:
            try:
                labels.append(int(fields[3]))
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: non-integer label") from None
        elif labels:
            raise ParseError(f"{path}: line {lineno}: missing label column")
        coords.append((x, y, z))
        if labels and len(labels) != len(coords):
            raise ParseError(f"{path}: line {lineno}: label column appeared mid-file")
    if not coords:
        raise ParseError(f"{path}: no points")
    return PointCloud(
        np.asarray(coords, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64) if labels else None,
    )


def _parse_packed(raw: bytes, path: Path) -> PointCloud:
    if len(raw) < _HEADER.size:
        raise ParseError(f"{path}: truncated header at offset {len(raw)}")
    magic, count, has_labels, has_category = _HEADER.unpack_from(raw)
    if magic != MAGIC_SAMPLE:
        raise ParseError(f"{path}: bad magic {magic!r} at offset 0")
    offset = _HEADER.size
    coord_bytes = count * 3 * 4
    if len(raw) < offset + coord_bytes:
        raise ParseError(f"{path}: truncated coordinates at offset {len(raw)}")
    coords = np.frombuffer(raw, dtype="<f4", count=count * 3, offset=offset).reshape(count, 3)
    offset += coord_bytes
    labels = None
    if has_labels:
        if len(raw) < offset + count * 2:
            raise ParseError(f"{path}: truncated labels at offset {len(raw)}")
        labels = np.frombuffer(raw, dtype="<u2", count=count, offset=offset).astype(np.int64)
        offset += count * 2
    category = None
    if has_category:
        if len(raw) < offset + 2:
            raise ParseError(f"{path}: truncated category at offset {len(raw)}")
        category = int(np.frombuffer(raw, dtype="<u2", count=1, offset=offset)[0])
    return PointCloud(coords.astype(np.float64), labels=labels, category=category)


def load_sample(path, n_points: int | None = None) -> PointCloud:
    """Read one sample in either format (auto-detected by magic bytes)."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == MAGIC_SAMPLE:
        cloud = _parse_packed(raw, path)
    else:
        cloud = _parse_xyz(raw, path)
    return _resample(cloud, n_points, path)


def save_sample(cloud: PointCloud, path, fmt: str | None = None) -> None:
    """Write one sample; format from ``fmt`` or the file suffix
    (.npc -> packed, anything else -> XYZ text)."""
    path = Path(path)
    if fmt is None:
        fmt = PACKED_FORMAT if path.suffix in (".npc", ".npc1", ".bin") else XYZ_FORMAT
    if fmt == XYZ_FORMAT:
        lines = []
        for i, (x, y, z) in enumerate(cloud.coords):
            row = f"{x:.9g} {y:.9g} {z:.9g}"
            if cloud.labels is not None:
                row += f" {cloud.labels[i]}"
            lines.append(row)
        path.write_text("\n".join(lines) + "\n")
        return
    if fmt != PACKED_FORMAT:
        raise ParseError(f"unknown sample format {fmt!r}")
    has_labels = cloud.labels is not None
    has_category = cloud.category is not None
    parts = [_HEADER.pack(MAGIC_SAMPLE, cloud.n, int(has_labels), int(has_category))]
    parts.append(cloud.coords.astype("<f4").tobytes())
    if has_labels:
        parts.append(cloud.labels.astype("<u2").tobytes())
    if has_category:
        parts.append(np.asarray([cloud.category], dtype="<u2").tobytes())
    path.write_bytes(b"".join(parts))


def convert(src, dst, fmt: str | None = None, n_points: int | None = None) -> None:
    """Load ``src`` and rewrite it at ``dst`` (optionally resampled)."""
    save_sample(load_sample(src, n_points=n_points), dst, fmt=fmt)
