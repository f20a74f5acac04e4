"""Feature interchange format, normalization, concatenation fusion and fold planning.

A bundle on disk is a directory containing

* ``manifest.json`` -- UTF-8 text with the dataset name, the class table,
  the ordered sample ids, the per-sample label ids and the view list
  (name, file, column count);
* one binary matrix file per view: magic bytes ``FUSE1``, then ``u32``
  little-endian row count, ``u32`` little-endian column count, then the
  row-major ``f32`` little-endian payload.

All rows of all views follow the sample order of the manifest.  Loading is
strict: shape or label mismatches and non-finite values are reported with
the offending view and position.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BundleError

MATRIX_MAGIC = b"FUSE1"
_MATRIX_HEADER = struct.Struct("<II")


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ClassLabel:
    """One row of the class table: a small contiguous id and a unique name."""

    id: int
    name: str


@dataclass(frozen=True)
class BundleManifest:
    dataset: str
    classes: tuple[ClassLabel, ...]
    samples: tuple[str, ...]

    def __post_init__(self) -> None:
        ids = [c.id for c in self.classes]
        if ids != list(range(len(ids))):
            raise BundleError(f"class ids must be contiguous 0..C-1, got {ids}")
        names = [c.name for c in self.classes]
        if len(set(names)) != len(names):
            raise BundleError(f"class names must be unique, got {names}")

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def class_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.classes)


@dataclass(frozen=True)
class FeatureView:
    """A named n_samples x width matrix of finite values.

    Construction takes ownership of ``matrix`` and marks it read-only.
    """

    name: str
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix)
        if m.ndim != 2:
            raise BundleError(f"view '{self.name}': matrix must be 2-D, got {m.ndim}-D")
        bad = ~np.isfinite(m)
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise BundleError(
                f"view '{self.name}': non-finite value at row {r}, column {c}"
            )
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def n_samples(self) -> int:
        return self.matrix.shape[0]

    @property
    def width(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class FeatureBundle:
    """Aligned multi-view feature set: manifest + named views + labels."""

    manifest: BundleManifest
    views: tuple[FeatureView, ...]
    labels: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.manifest.samples)
        names = [v.name for v in self.views]
        if len(set(names)) != len(names):
            raise BundleError(f"duplicate view names: {names}")
        for v in self.views:
            if v.n_samples != n:
                raise BundleError(
                    f"view '{v.name}' has {v.n_samples} rows, manifest lists {n} samples"
                )
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.shape != (n,):
            raise BundleError(f"labels length {labels.shape} does not match {n} samples")
        c = self.manifest.n_classes
        for i, lab in enumerate(labels):
            if not 0 <= lab < c:
                raise BundleError(
                    f"sample '{self.manifest.samples[i]}' (index {i}) has unknown label id {lab}"
                )
        object.__setattr__(self, "labels", _freeze(labels))

    @property
    def n_samples(self) -> int:
        return len(self.manifest.samples)

    @property
    def n_classes(self) -> int:
        return self.manifest.n_classes

    @property
    def view_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.views)

    def view(self, name: str) -> FeatureView:
        for v in self.views:
            if v.name == name:
                return v
        raise BundleError(f"unknown view name '{name}' (have {list(self.view_names)})")


def write_matrix(path: Path | str, matrix: np.ndarray) -> None:
    """Write a 2-D array as a FUSE1 file (f32 little-endian payload)."""
    m = np.ascontiguousarray(np.asarray(matrix), dtype="<f4")
    if m.ndim != 2:
        raise BundleError(f"matrix file payload must be 2-D, got {m.ndim}-D")
    with open(path, "wb") as fh:
        fh.write(MATRIX_MAGIC)
        fh.write(_MATRIX_HEADER.pack(m.shape[0], m.shape[1]))
        fh.write(m.tobytes())


def read_matrix(path: Path | str) -> np.ndarray:
    """Read a FUSE1 matrix file; returns a read-only float32 array."""
    path = Path(path)
    if not path.is_file():
        raise BundleError(f"missing matrix file: {path}")
    data = path.read_bytes()
    if data[: len(MATRIX_MAGIC)] != MATRIX_MAGIC:
        raise BundleError(f"{path}: bad magic, expected {MATRIX_MAGIC!r}")
    off = len(MATRIX_MAGIC)
    if len(data) < off + _MATRIX_HEADER.size:
        raise BundleError(f"{path}: truncated header")
    rows, cols = _MATRIX_HEADER.unpack_from(data, off)
    off += _MATRIX_HEADER.size
    expected = off + 4 * rows * cols
    if len(data) != expected:
        raise BundleError(
            f"{path}: expected {expected} bytes for {rows}x{cols} f32 payload, found {len(data)}"
        )
    m = np.frombuffer(data, dtype="<f4", offset=off).reshape(rows, cols)
    return _freeze(m.copy())


def save_bundle(bundle: FeatureBundle, path: Path | str) -> None:
    """Write a bundle directory (manifest.json plus one FUSE1 file per view).

    View payloads are stored as f32; float64 views are rounded on write.
    """
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    views = []
    for v in bundle.views:
        fname = f"{v.name}.fuse"
        write_matrix(root / fname, v.matrix)
        views.append({"name": v.name, "file": fname, "columns": v.width})
    manifest = {
        "dataset": bundle.manifest.dataset,
        "classes": [{"id": c.id, "name": c.name} for c in bundle.manifest.classes],
        "samples": list(bundle.manifest.samples),
        "labels": [int(x) for x in bundle.labels],
        "views": views,
    }
    (root / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )


def load_bundle(path: Path | str) -> FeatureBundle:
    """Load and fully validate a bundle directory."""
    root = Path(path)
    mpath = root / "manifest.json"
    if not mpath.is_file():
        raise BundleError(f"missing manifest file: {mpath}")
    try:
        raw = json.loads(mpath.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise BundleError(f"{mpath}: manifest is not valid JSON: {e}") from e
    for key in ("dataset", "classes", "samples", "labels", "views"):
        if key not in raw:
            raise BundleError(f"{mpath}: manifest missing field '{key}'")
    manifest = BundleManifest(
        dataset=raw["dataset"],
        classes=tuple(ClassLabel(int(c["id"]), str(c["name"])) for c in raw["classes"]),
        samples=tuple(str(s) for s in raw["samples"]),
    )
    n = len(manifest.samples)
    views = []
    for entry in raw["views"]:
        name, fname, cols = entry["name"], entry["file"], int(entry["columns"])
        matrix = read_matrix(root / fname)
        if matrix.shape[0] != n:
            raise BundleError(
                f"view '{name}': matrix has {matrix.shape[0]} rows, manifest lists {n} samples"
            )
        if matrix.shape[1] != cols:
            raise BundleError(
                f"view '{name}': matrix has {matrix.shape[1]} columns, manifest declares {cols}"
            )
        views.append(FeatureView(name=name, matrix=matrix))
    return FeatureBundle(manifest=manifest, views=tuple(views), labels=np.asarray(raw["labels"]))


@dataclass(frozen=True)
class NormalizationStats:
    """Per-column mean and population standard deviation of one view."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        if mean.shape != std.shape or mean.ndim != 1:
            raise BundleError("normalization stats must be 1-D arrays of equal length")
        if (std < 0).any():
            raise BundleError("standard deviations must be non-negative")
        object.__setattr__(self, "mean", _freeze(mean))
        object.__setattr__(self, "std", _freeze(std))

    @property
    def width(self) -> int:
        return self.mean.shape[0]


def fit_normalizer(view: FeatureView, sample_subset) -> NormalizationStats:
    """Column statistics over the given rows only (population std, float64).

    Fitting on training rows and applying everywhere is the caller's leakage
    guard; this function never looks outside ``sample_subset``.
    """
    idx = np.asarray(list(sample_subset), dtype=np.int64)
    if idx.size == 0:
        raise ValueError("sample subset for normalization must be non-empty")
    rows = view.matrix[idx].astype(np.float64)
    return NormalizationStats(mean=rows.mean(axis=0), std=rows.std(axis=0))


def apply_normalizer(view: FeatureView, stats: NormalizationStats) -> FeatureView:
    """Transform each column to (x - mean) / std; zero-variance columns map to 0."""
    if stats.width != view.width:
        raise ValueError(
            f"stats width {stats.width} does not match view '{view.name}' width {view.width}"
        )
    x = view.matrix.astype(np.float64)
    safe = np.where(stats.std == 0.0, 1.0, stats.std)
    z = (x - stats.mean) / safe
    z[:, stats.std == 0.0] = 0.0
    return FeatureView(name=view.name, matrix=z)


def concatenate_views(bundle: FeatureBundle, view_names) -> FeatureView:
    """Row-wise concatenation of the listed views, in the given order."""
    names = list(view_names)
    if not names:
        raise ValueError("need at least one view name to concatenate")
    parts = [bundle.view(n).matrix for n in names]
    return FeatureView(name="+".join(names), matrix=np.concatenate(parts, axis=1))


@dataclass(frozen=True)
class FoldPlan:
    """Per-sample fold assignment for stratified k-fold cross-validation."""

    k: int
    assignment: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        a = np.asarray(self.assignment, dtype=np.int64)
        if self.k < 2:
            raise ValueError(f"fold count must be >= 2, got {self.k}")
        used = set(a.tolist())
        if used != set(range(self.k)):
            raise ValueError(f"every fold index 0..{self.k - 1} must be used, got {sorted(used)}")
        object.__setattr__(self, "assignment", _freeze(a))

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != fold)


def stratified_kfold(labels, k: int, seed: int) -> FoldPlan:
    """Deterministic stratified fold assignment.

    Samples of each class are shuffled with a seeded PRNG (numpy PCG64 via
    ``default_rng``) and dealt round-robin into the k folds from a
    PRNG-drawn starting fold, so per-class fold counts differ by at most 1.
    Identical (labels, k, seed) always yield the identical assignment.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if k < 2:
        raise ValueError(f"fold count must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    assignment = np.full(labels.shape[0], -1, dtype=np.int64)
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if members.size < k:
            raise ValueError(
                f"class {cls} has {members.size} samples, fewer than k={k}"
            )
        order = rng.permutation(members)
        start = int(rng.integers(k))
        for i, sample in enumerate(order):
            assignment[sample] = (start + i) % k
    return FoldPlan(k=k, assignment=assignment, seed=seed)
