"""Flat binary container for named arrays plus a JSON metadata record.

Used for parameter checkpoints and ingested clip archives. The layout
is fixed-endian and timestamp-free, so writing the same content twice
produces byte-identical files and float64 values round-trip bit-exactly.

Layout (all integers little-endian):
    magic   4 bytes  b"FGCN"
    version u32      1
    meta    u64 length + UTF-8 JSON (sorted keys)
    count   u64
    record  u16 name length + UTF-8 name
            u8  dtype code (0 = float64, 1 = int64)
            u8  ndim
            u64 per dimension
            raw little-endian array data, row-major
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"FGCN"
VERSION = 1

_DTYPES = {0: np.dtype("<f8"), 1: np.dtype("<i8")}
_CODES = {np.dtype(np.float64): 0, np.dtype(np.int64): 1}


class CheckpointError(ValueError):
    """Raised for unreadable or inconsistent container files."""


def save_arrays(path: str | Path, arrays: dict[str, np.ndarray],
                meta: dict | None = None) -> None:
    chunks = [MAGIC, struct.pack("<I", VERSION)]
    meta_bytes = json.dumps(meta or {}, sort_keys=True).encode("utf-8")
    chunks.append(struct.pack("<Q", len(meta_bytes)))
    chunks.append(meta_bytes)
    chunks.append(struct.pack("<Q", len(arrays)))
    for name, arr in arrays.items():
        arr = np.asarray(arr)
        if not arr.flags["C_CONTIGUOUS"]:
            arr = arr.copy(order="C")  # np.ascontiguousarray would promote 0-d to 1-d
        if arr.dtype not in _CODES:
            raise CheckpointError(f"record '{name}': unsupported dtype {arr.dtype}")
        name_bytes = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(name_bytes)))
        chunks.append(name_bytes)
        chunks.append(struct.pack("<BB", _CODES[arr.dtype], arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        chunks.append(arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes())
    Path(path).write_bytes(b"".join(chunks))


def load_arrays(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    """Read back (arrays in original order, metadata dict)."""
    buf = Path(path).read_bytes()
    pos = 0

    def take(n: int) -> bytes:
        nonlocal pos
        if pos + n > len(buf):
            raise CheckpointError(f"{path}: truncated at byte {pos}")
        chunk = buf[pos:pos + n]
        pos += n
        return chunk

    if take(4) != MAGIC:
        raise CheckpointError(f"{path}: bad magic, not a fallgcn container")
    (version,) = struct.unpack("<I", take(4))
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported container version {version}")
    (meta_len,) = struct.unpack("<Q", take(8))
    meta = json.loads(take(meta_len).decode("utf-8")) if meta_len else {}
    (count,) = struct.unpack("<Q", take(8))
    arrays: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2))
        name = take(name_len).decode("utf-8")
        code, ndim = struct.unpack("<BB", take(2))
        if code not in _DTYPES:
            raise CheckpointError(f"{path}: record '{name}' has unknown dtype code {code}")
        shape = struct.unpack(f"<{ndim}Q", take(8 * ndim))
        n_items = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        data = np.frombuffer(take(n_items * 8), dtype=_DTYPES[code]).reshape(shape)
        arrays[name] = data.astype(data.dtype.newbyteorder("="), copy=True)
    if pos != len(buf):
        raise CheckpointError(f"{path}: {len(buf) - pos} trailing bytes")
    return arrays, meta
