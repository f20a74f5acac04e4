"""Bundle interchange formats written by the extractor.

These mirror the engine's on-disk contract from this side of the fence:
matrix files carry magic ``FUSE1``, u32 little-endian rows and columns and
a row-major f32 little-endian payload; activation tensors carry magic
``CAMT1``, u32 H, W, K and f32 values in (row, column, channel) order; the
manifest is UTF-8 JSON with explicit field names.  All writes go through a
temp file and an atomic rename.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

MATRIX_MAGIC = b"FUSE1"
TENSOR_MAGIC = b"CAMT1"
_MATRIX_HEADER = struct.Struct("<II")
_TENSOR_HEADER = struct.Struct("<III")


def _atomic_write(path: Path, payload: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)


def write_matrix(path: Path | str, matrix: np.ndarray) -> None:
    m = np.ascontiguousarray(np.asarray(matrix), dtype="<f4")
    if m.ndim != 2:
        raise ValueError(f"matrix payload must be 2-D, got {m.ndim}-D")
    _atomic_write(Path(path), MATRIX_MAGIC + _MATRIX_HEADER.pack(*m.shape) + m.tobytes())


def read_matrix_header(path: Path | str) -> tuple[int, int, int]:
    """(rows, cols, expected total byte count) from a matrix file header."""
    with open(path, "rb") as fh:
        head = fh.read(len(MATRIX_MAGIC) + _MATRIX_HEADER.size)
    if head[: len(MATRIX_MAGIC)] != MATRIX_MAGIC or len(head) < len(MATRIX_MAGIC) + _MATRIX_HEADER.size:
        raise ValueError(f"{path}: not a FUSE1 matrix file")
    rows, cols = _MATRIX_HEADER.unpack_from(head, len(MATRIX_MAGIC))
    return rows, cols, len(head) + 4 * rows * cols


def read_matrix(path: Path | str) -> np.ndarray:
    rows, cols, expected = read_matrix_header(path)
    data = Path(path).read_bytes()
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(data)}")
    offset = len(MATRIX_MAGIC) + _MATRIX_HEADER.size
    return np.frombuffer(data, dtype="<f4", offset=offset).reshape(rows, cols).copy()


def write_tensor(path: Path | str, values: np.ndarray) -> None:
    v = np.ascontiguousarray(np.asarray(values), dtype="<f4")
    if v.ndim != 3:
        raise ValueError(f"activation tensor must be 3-D, got {v.ndim}-D")
    _atomic_write(Path(path), TENSOR_MAGIC + _TENSOR_HEADER.pack(*v.shape) + v.tobytes())


def read_tensor_header(path: Path | str) -> tuple[int, int, int, int]:
    """(H, W, K, expected total byte count) from a tensor file header."""
    with open(path, "rb") as fh:
        head = fh.read(len(TENSOR_MAGIC) + _TENSOR_HEADER.size)
    if head[: len(TENSOR_MAGIC)] != TENSOR_MAGIC or len(head) < len(TENSOR_MAGIC) + _TENSOR_HEADER.size:
        raise ValueError(f"{path}: not a CAMT1 tensor file")
    h, w, k = _TENSOR_HEADER.unpack_from(head, len(TENSOR_MAGIC))
    return h, w, k, len(head) + 4 * h * w * k


def load_manifest(bundle_dir: Path | str) -> dict | None:
    path = Path(bundle_dir) / "manifest.json"
    if not path.is_file():
        return None
    return json.loads(path.read_text(encoding="utf-8"))


def save_manifest(bundle_dir: Path | str, manifest: dict) -> None:
    path = Path(bundle_dir) / "manifest.json"
    _atomic_write(path, (json.dumps(manifest, indent=2) + "\n").encode("utf-8"))
