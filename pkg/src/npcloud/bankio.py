"""Memory bank persistence (NPB1 format).

Little-endian layout:

    magic "NPB1" | u8 version | u8 kind (0=cls, 1=seg) | u8 precision
    (0=fp32, 1=fp16) | u8 reserved | 16-byte ascii config digest |
    u32 meta length | meta JSON | payload arrays | u32 CRC32 trailer

The config digest ties a bank to the encoder configuration that produced
it; loading with a different configuration's digest is refused. The CRC32
covers every preceding byte, so truncation or corruption is detected
before any array is trusted.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import ConfigHashMismatch, CorruptBank
from .inference import CategoryPrototypes, ClsBank, SegBank

MAGIC_BANK = b"NPB1"
_VERSION = 1
_KIND_CLS = 0
_KIND_SEG = 1
_HEAD = struct.Struct("<4sBBBB16s")

PRECISIONS = {"fp32": 0, "fp16": 1}
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f2")}


def _digest_bytes(digest: str) -> bytes:
    raw = digest.encode("ascii")[:16]
    return raw.ljust(16, b"\0")


def save_bank(bank, path, precision: str = "fp32") -> None:
    """Serialize a classification or segmentation bank.

    ``precision`` selects fp32 (lossless for fp32 banks) or fp16 storage;
    fp16 halves the footprint at < 1e-3 relative error per value.
    """
    if precision not in PRECISIONS:
        raise CorruptBank(f"unknown precision {precision!r}")
    code = PRECISIONS[precision]
    dtype = _DTYPES[code]

    if isinstance(bank, ClsBank):
        kind = _KIND_CLS
        meta = {
            "gamma": bank.gamma,
            "dim": int(bank.dim),
            "count": int(bank.size),
            "class_names": list(bank.class_names),
        }
        arrays = [
            np.ascontiguousarray(bank.descriptors, dtype=dtype).tobytes(),
            np.ascontiguousarray(bank.class_ids, dtype="<u2").tobytes(),
        ]
    elif isinstance(bank, SegBank):
        kind = _KIND_SEG
        cats = []
        arrays = []
        for cat in sorted(bank.categories):
            entry = bank.categories[cat]
            cats.append(
                {
                    "id": int(cat),
                    "count": int(entry.prototypes.shape[0]),
                    "valid_parts": entry.valid_parts.tolist(),
                }
            )
            arrays.append(np.ascontiguousarray(entry.prototypes, dtype=dtype).tobytes())
            arrays.append(np.ascontiguousarray(entry.part_ids, dtype="<u2").tobytes())
        dims = {entry.prototypes.shape[1] for entry in bank.categories.values()}
        meta = {
            "gamma": bank.gamma,
            "dim": int(dims.pop()) if dims else 0,
            "skipped_parts": int(bank.skipped_parts),
            "categories": cats,
        }
    else:
        raise CorruptBank(f"cannot serialize {type(bank).__name__}")

    meta_blob = json.dumps(meta, sort_keys=True).encode()
    body = b"".join(
        [
            _HEAD.pack(MAGIC_BANK, _VERSION, kind, code, 0, _digest_bytes(bank.config_digest)),
            struct.pack("<I", len(meta_blob)),
            meta_blob,
            *arrays,
        ]
    )
    Path(path).write_bytes(body + struct.pack("<I", zlib.crc32(body)))


def _take(raw: bytes, offset: int, size: int, what: str) -> tuple[bytes, int]:
    if len(raw) < offset + size:
        raise CorruptBank(f"truncated bank: {what} at offset {offset}")
    return raw[offset : offset + size], offset + size


def load_bank(path, expected_digest: str | None = None):
    """Load a bank, verifying magic, version, CRC, and (when given) that
    the stored config digest matches the caller's encoder configuration."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEAD.size + 8:
        raise CorruptBank(f"{path}: file too short ({len(raw)} bytes)")
    body, trailer = raw[:-4], raw[-4:]
    if struct.unpack("<I", trailer)[0] != zlib.crc32(body):
        raise CorruptBank(f"{path}: CRC mismatch")
    magic, version, kind, code, _, digest_raw = _HEAD.unpack_from(body)
    if magic != MAGIC_BANK:
        raise CorruptBank(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise CorruptBank(f"{path}: unsupported version {version}")
    if code not in _DTYPES:
        raise CorruptBank(f"{path}: unknown precision code {code}")
    digest = digest_raw.rstrip(b"\0").decode("ascii")
    if expected_digest is not None and digest != expected_digest:
        raise ConfigHashMismatch(
            f"{path}: bank built under config {digest}, current config is {expected_digest}"
        )
    dtype = _DTYPES[code]
    precision = "fp16" if code == 1 else "fp32"

    offset = _HEAD.size
    blob, offset = _take(body, offset, 4, "meta length")
    (meta_len,) = struct.unpack("<I", blob)
    blob, offset = _take(body, offset, meta_len, "meta")
    try:
        meta = json.loads(blob.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptBank(f"{path}: bad meta block ({exc})") from None

    if kind == _KIND_CLS:
        dim, count = int(meta["dim"]), int(meta["count"])
        blob, offset = _take(body, offset, dim * count * dtype.itemsize, "descriptors")
        f = np.frombuffer(blob, dtype=dtype).reshape(dim, count)
        blob, offset = _take(body, offset, count * 2, "class ids")
        ids = np.frombuffer(blob, dtype="<u2").astype(np.int64)
        names = tuple(meta["class_names"])
        y = np.zeros((count, len(names)), dtype=np.float32)
        y[np.arange(count), ids] = 1.0
        return ClsBank(
            descriptors=f,
            labels_onehot=y,
            gamma=float(meta["gamma"]),
            class_names=names,
            config_digest=digest,
        )
    if kind == _KIND_SEG:
        dim = int(meta["dim"])
        categories = {}
        for cat in meta["categories"]:
            count = int(cat["count"])
            blob, offset = _take(body, offset, count * dim * dtype.itemsize, "prototypes")
            protos = np.frombuffer(blob, dtype=dtype).reshape(count, dim)
            blob, offset = _take(body, offset, count * 2, "part ids")
            parts = np.frombuffer(blob, dtype="<u2").astype(np.int64)
            categories[int(cat["id"])] = CategoryPrototypes(
                prototypes=protos,
                part_ids=parts,
                valid_parts=np.asarray(cat["valid_parts"], dtype=np.int64),
            )
        return SegBank(
            categories=categories,
            gamma=float(meta["gamma"]),
            config_digest=digest,
            skipped_parts=int(meta.get("skipped_parts", 0)),
        )
    raise CorruptBank(f"{path}: unknown bank kind {kind}")
