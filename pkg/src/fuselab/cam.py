"""Class Activation Maps: weighted channel sums, min-max normalization,
corner-aligned bilinear upsampling and portable PGM/PPM export.

Activation tensors travel as ``CAMT1`` files: magic bytes, then u32
little-endian H, W, K, then f32 little-endian values in (row, column,
channel) order.  Heatmap export uses uncompressed binary PGM (P5) and,
optionally, a color PPM (P6) with a documented blue-to-red ramp, so every
exported byte is reproducible.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TENSOR_MAGIC = b"CAMT1"
_TENSOR_HEADER = struct.Struct("<III")


@dataclass(frozen=True)
class ActivationTensor:
    """H x W x K feature maps from a network's last convolutional layer."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 3 or min(v.shape) < 1:
            raise ValueError(f"activation tensor must be H x W x K with positive dims, got {v.shape}")
        if not np.isfinite(v).all():
            raise ValueError("activation tensor contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape


@dataclass(frozen=True)
class CamHeatmap:
    """Normalized h x w map in [0, 1] plus provenance."""

    values: np.ndarray
    source_shape: tuple[int, int, int] | None = None
    class_id: int | None = None
    constant: bool = False

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or min(v.shape) < 1:
            raise ValueError(f"heatmap must be 2-D with positive dims, got {v.shape}")
        if ((v < 0.0) | (v > 1.0)).any():
            raise ValueError("heatmap values must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def compute_cam(activations: ActivationTensor, weights, relu: bool = False) -> np.ndarray:
    """Raw map M(i, j) = sum_k w_k * A(i, j, k); linear in the weights.

    ``relu`` optionally clamps negatives for visual parity with pipelines
    that rectify before normalizing; the default leaves the sum untouched.
    """
    w = np.asarray(weights, dtype=np.float64).ravel()
    k = activations.shape[2]
    if w.shape[0] != k:
        raise ValueError(f"weight vector has {w.shape[0]} entries, tensor has {k} channels")
    if not np.isfinite(w).all():
        raise ValueError("class weights contain non-finite values")
    raw = activations.values @ w
    if relu:
        raw = np.maximum(raw, 0.0)
    return raw


def normalize_minmax(
    raw: np.ndarray,
    source_shape: tuple[int, int, int] | None = None,
    class_id: int | None = None,
) -> CamHeatmap:
    """(x - min) / (max - min); a constant map becomes all zeros, flagged."""
    m = np.asarray(raw, dtype=np.float64)
    if not np.isfinite(m).all():
        raise ValueError("raw map contains non-finite values")
    lo, hi = float(m.min()), float(m.max())
    if hi == lo:
        return CamHeatmap(
            values=np.zeros_like(m), source_shape=source_shape, class_id=class_id, constant=True
        )
    return CamHeatmap(
        values=(m - lo) / (hi - lo), source_shape=source_shape, class_id=class_id, constant=False
    )


def bilinear_upsample(map2d: np.ndarray, target_h: int, target_w: int) -> np.ndarray:
    """Corner-aligned bilinear resampling; output stays inside the input range."""
    m = np.asarray(map2d, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D map, got {m.ndim}-D")
    if target_h < 1 or target_w < 1:
        raise ValueError(f"target dims must be positive, got {target_h} x {target_w}")
    h, w = m.shape
    src_r = np.linspace(0.0, h - 1.0, target_h) if target_h > 1 else np.zeros(1)
    src_c = np.linspace(0.0, w - 1.0, target_w) if target_w > 1 else np.zeros(1)
    if h == 1:
        src_r = np.zeros(target_h)
    if w == 1:
        src_c = np.zeros(target_w)
    r0 = np.clip(np.floor(src_r).astype(np.int64), 0, h - 1)
    c0 = np.clip(np.floor(src_c).astype(np.int64), 0, w - 1)
    r1 = np.minimum(r0 + 1, h - 1)
    c1 = np.minimum(c0 + 1, w - 1)
    fr = (src_r - r0)[:, None]
    fc = (src_c - c0)[None, :]
    top = m[r0][:, c0] * (1.0 - fc) + m[r0][:, c1] * fc
    bottom = m[r1][:, c0] * (1.0 - fc) + m[r1][:, c1] * fc
    return top * (1.0 - fr) + bottom * fr


def _quantize(values: np.ndarray) -> np.ndarray:
    # round half up on 255*v, the documented 8-bit quantization
    return np.clip(np.floor(255.0 * values + 0.5), 0, 255).astype(np.uint8)


def export_heatmap(heatmap: CamHeatmap, path: Path | str, color: bool = False) -> None:
    """Write an 8-bit grayscale PGM; with ``color``, also a PPM alongside.

    The PPM uses the blue-to-red ramp (r, g, b) = (q, 0, 255 - q) where q is
    the quantized intensity.  Both files are byte-deterministic.
    """
    path = Path(path)
    q = _quantize(heatmap.values)
    h, w = q.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(q.tobytes())
    if color:
        rgb = np.stack([q, np.zeros_like(q), 255 - q], axis=-1)
        with open(path.with_suffix(".ppm"), "wb") as fh:
            fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
            fh.write(rgb.tobytes())


def save_tensor(tensor: ActivationTensor, path: Path | str) -> None:
    """Write a CAMT1 activation tensor file."""
    h, w, k = tensor.shape
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC)
        fh.write(_TENSOR_HEADER.pack(h, w, k))
        fh.write(np.ascontiguousarray(tensor.values, dtype="<f4").tobytes())


def load_tensor(path: Path | str) -> ActivationTensor:
    """Read a CAMT1 activation tensor file."""
    path = Path(path)
    if not path.is_file():
        raise ValueError(f"missing activation file: {path}")
    data = path.read_bytes()
    if data[: len(TENSOR_MAGIC)] != TENSOR_MAGIC:
        raise ValueError(f"{path}: bad magic, expected {TENSOR_MAGIC!r}")
    off = len(TENSOR_MAGIC)
    if len(data) < off + _TENSOR_HEADER.size:
        raise ValueError(f"{path}: truncated header")
    h, w, k = _TENSOR_HEADER.unpack_from(data, off)
    off += _TENSOR_HEADER.size
    expected = off + 4 * h * w * k
    if len(data) != expected:
        raise ValueError(
            f"{path}: expected {expected} bytes for {h}x{w}x{k} f32 payload, found {len(data)}"
        )
    values = np.frombuffer(data, dtype="<f4", offset=off).reshape(h, w, k)
    return ActivationTensor(values=values)
