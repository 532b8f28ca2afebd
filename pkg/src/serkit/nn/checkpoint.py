"""Versioned binary checkpoints: a named-tensor table.

Layout (all integers little-endian):
    magic   8 bytes  b"SERKCKPT"
    version u32      currently 1
    count   u32      number of tensors
  then per tensor:
    name_len u32, name utf-8, ndim u32, dims ndim x u64, data float64 LE
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import MalformedContainer

MAGIC = b"SERKCKPT"
VERSION = 1


def save_checkpoint(path, tensors):
    """Write a {name: ndarray} table; insertion order is preserved."""
    path = Path(path)
    parts = [MAGIC, struct.pack("<II", VERSION, len(tensors))]
    for name, arr in tensors.items():
        arr = np.asarray(arr, dtype="<f8", order="C")  # keeps 0-d shapes intact
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<I", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}Q", *arr.shape) if arr.ndim else b"")
        parts.append(arr.tobytes())
    path.write_bytes(b"".join(parts))


def load_checkpoint(path):
    """Read a checkpoint back into {name: float64 ndarray}."""
    blob = Path(path).read_bytes()
    if blob[:8] != MAGIC:
        raise MalformedContainer(f"{path}: not a checkpoint file")
    version, count = struct.unpack_from("<II", blob, 8)
    if version != VERSION:
        raise MalformedContainer(f"{path}: unsupported checkpoint version {version}")
    offset = 16
    tensors = {}
    try:
        for _ in range(count):
            (name_len,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            name = blob[offset:offset + name_len].decode("utf-8")
            offset += name_len
            (ndim,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            shape = struct.unpack_from(f"<{ndim}Q", blob, offset) if ndim else ()
            offset += 8 * ndim
            size = int(np.prod(shape, dtype=np.int64)) if ndim else 1
            data = np.frombuffer(blob, dtype="<f8", count=size, offset=offset)
            offset += 8 * size
            tensors[name] = data.astype(np.float64).reshape(shape)
    except (struct.error, ValueError) as exc:
        raise MalformedContainer(f"{path}: truncated checkpoint ({exc})") from exc
    if offset != len(blob):
        raise MalformedContainer(f"{path}: {len(blob) - offset} trailing bytes")
    return tensors
