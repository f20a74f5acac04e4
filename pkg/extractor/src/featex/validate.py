"""Bundle validation: every invariant and every byte-level format check,
reported as a list of problems rather than thrown, so CI can consume the
exit status."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .formats import read_matrix, read_matrix_header, read_tensor_header


@dataclass
class ValidationReport:
    bundle: str
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def add(self, message: str) -> None:
        self.problems.append(message)


def _validate_matrix(report, path: Path, expected_rows=None, expected_cols=None, label=""):
    try:
        rows, cols, expected_bytes = read_matrix_header(path)
    except Exception as e:
        report.add(f"{label}{path.name}: {e}")
        return
    actual = path.stat().st_size
    if actual != expected_bytes:
        report.add(f"{label}{path.name}: expected {expected_bytes} bytes for {rows}x{cols} payload, found {actual}")
        return
    if expected_rows is not None and rows != expected_rows:
        report.add(f"{label}{path.name}: {rows} rows, manifest lists {expected_rows} samples")
    if expected_cols is not None and cols != expected_cols:
        report.add(f"{label}{path.name}: {cols} columns, manifest declares {expected_cols}")
    values = read_matrix(path)
    if not np.isfinite(values).all():
        r, c = np.argwhere(~np.isfinite(values))[0]
        report.add(f"{label}{path.name}: non-finite value at row {r}, column {c}")


def validate_bundle(bundle_dir: Path | str) -> ValidationReport:
    root = Path(bundle_dir)
    report = ValidationReport(bundle=str(root))
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        report.add(f"missing manifest file: {manifest_path}")
        return report
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        report.add(f"manifest.json: invalid JSON: {e}")
        return report
    for key in ("dataset", "classes", "samples", "labels", "views"):
        if key not in manifest:
            report.add(f"manifest.json: missing field '{key}'")
    if report.problems:
        return report

    ids = [c.get("id") for c in manifest["classes"]]
    names = [c.get("name") for c in manifest["classes"]]
    if ids != list(range(len(ids))):
        report.add(f"class ids must be contiguous 0..C-1, got {ids}")
    if len(set(names)) != len(names):
        report.add(f"class names must be unique, got {names}")

    samples = manifest["samples"]
    if len(set(samples)) != len(samples):
        report.add("duplicate sample ids in manifest")
    labels = manifest["labels"]
    if len(labels) != len(samples):
        report.add(f"{len(labels)} labels for {len(samples)} samples")
    else:
        for i, lab in enumerate(labels):
            if not isinstance(lab, int) or not 0 <= lab < len(ids):
                report.add(f"sample '{samples[i]}' has unknown label id {lab}")
                break

    view_names = [v.get("name") for v in manifest["views"]]
    if len(set(view_names)) != len(view_names):
        report.add(f"duplicate view names: {view_names}")
    for view in manifest["views"]:
        path = root / view["file"]
        if not path.is_file():
            report.add(f"view '{view['name']}': missing matrix file {path.name}")
            continue
        _validate_matrix(
            report,
            path,
            expected_rows=len(samples),
            expected_cols=int(view["columns"]),
            label=f"view '{view['name']}': ",
        )

    for extra in sorted(root.glob("weights_*.fuse")):
        _validate_matrix(report, extra)

    act_root = root / "activations"
    if act_root.is_dir():
        for camt in sorted(act_root.rglob("*.camt")):
            try:
                h, w, k, expected_bytes = read_tensor_header(camt)
            except Exception as e:
                report.add(f"{camt.relative_to(root)}: {e}")
                continue
            actual = camt.stat().st_size
            if actual != expected_bytes:
                report.add(
                    f"{camt.relative_to(root)}: expected {expected_bytes} bytes for "
                    f"{h}x{w}x{k} payload, found {actual}"
                )
    return report
