"""Versioned binary container for named float64 tensors.

Layout (all integers little-endian)::

    b"BVPT"            magic
    uint16             format version
    uint32             header length H
    H bytes            UTF-8 JSON: {"meta": {...}, "tensors": [{"name", "shape"}, ...]}
    float64 data       each tensor, row-major, in header order

Model weights and window/image archives share this format; ``meta``
carries the config echo. JSON keys are sorted so identical content gives
identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import ContainerError

MAGIC = b"BVPT"
VERSION = 1
_HEAD = struct.Struct("<4sHI")


def dumps(tensors: list[tuple[str, np.ndarray]], meta: dict | None = None) -> bytes:
    arrays = [(name, np.asarray(a, dtype="<f8", order="C")) for name, a in tensors]
    header = {"meta": meta or {}, "tensors": [{"name": n, "shape": list(a.shape)} for n, a in arrays]}
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [_HEAD.pack(MAGIC, VERSION, len(blob)), blob]
    parts.extend(a.tobytes() for _, a in arrays)
    return b"".join(parts)


def loads(data: bytes) -> tuple[list[tuple[str, np.ndarray]], dict]:
    if len(data) < _HEAD.size:
        raise ContainerError("container truncated before header")
    magic, version, hlen = _HEAD.unpack_from(data)
    if magic != MAGIC:
        raise ContainerError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ContainerError(f"unsupported container version {version}")
    start = _HEAD.size
    try:
        header = json.loads(data[start : start + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerError(f"corrupt header: {exc}") from None
    offset = start + hlen
    tensors = []
    for spec in header["tensors"]:
        shape = tuple(spec["shape"])
        nbytes = 8 * int(np.prod(shape, dtype=np.int64))
        if offset + nbytes > len(data):
            raise ContainerError(f"tensor {spec['name']} truncated")
        arr = np.frombuffer(data, dtype="<f8", count=nbytes // 8, offset=offset).reshape(shape).astype(np.float64)
        tensors.append((spec["name"], arr))
        offset += nbytes
    if offset != len(data):
        raise ContainerError(f"{len(data) - offset} trailing bytes after last tensor")
    return tensors, header["meta"]


def save(path: str | Path, tensors, meta: dict | None = None) -> None:
    Path(path).write_bytes(dumps(tensors, meta))


def load(path: str | Path):
    return loads(Path(path).read_bytes())
