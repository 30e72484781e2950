"""Binary storage for precomputed image feature vectors.

File layout: magic bytes ``SFV1``, then two little-endian uint32 fields
(vector count, dimension), then ``count * dim`` little-endian float32
values in row order. Records in the JSON stores reference vectors by
index into one of these files.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"SFV1"
_HEADER = struct.Struct("<4sII")


class VectorFileError(ValueError):
    pass


def write_vectors(path: str | Path, vectors: np.ndarray) -> None:
    """Write a (count, dim) float array; empty arrays must still be 2-D."""
    arr = np.asarray(vectors, dtype="<f4")
    if arr.ndim != 2:
        raise VectorFileError(f"expected a (count, dim) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise VectorFileError("feature vectors must be finite")
    count, dim = arr.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, count, dim))
        fh.write(arr.tobytes(order="C"))


def read_vectors(path: str | Path) -> np.ndarray:
    """Read a vector file into a float32 (count, dim) array."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise VectorFileError(f"{path}: truncated header")
    magic, count, dim = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise VectorFileError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + count * dim * 4
    if len(data) != expected:
        raise VectorFileError(
            f"{path}: expected {expected} bytes for {count}x{dim}, got {len(data)}"
        )
    arr = np.frombuffer(data, dtype="<f4", offset=_HEADER.size).reshape(count, dim)
    if not np.all(np.isfinite(arr)):
        raise VectorFileError(f"{path}: non-finite values")
    return arr.copy()
