"""Fine-tune one architecture on an image folder and export its view.

Each run appends to (or starts) a feature bundle:

* ``<arch>.fuse`` -- the per-image feature matrix, one row per sample in
  manifest order;
* ``weights_<arch>.fuse`` -- the trained classifier kernel, one row per
  class, usable as CAM class-weight vectors for the pooled architectures;
* ``activations/<arch>/<sample>.camt`` -- the last-conv feature maps per
  image;
* ``manifest.json`` -- updated atomically, recording the feature layer,
  input size and weight provenance of every view.

Successive runs must see the identical sample set; the manifest's sample
order is the cross-view alignment contract.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .archs import ARCHITECTURES, build_model, default_input_size
from .dataset import ImageFolder, load_images, scan_image_folder
from .formats import load_manifest, save_manifest, write_matrix, write_tensor


@dataclass(frozen=True)
class ExtractorJob:
    architecture: str
    data_dir: str
    out_dir: str
    epochs: int = 50
    batch_size: int = 16
    learning_rate: float = 0.0001
    momentum: float = 0.9
    freeze_depth: int = 0
    input_size: int | None = None  # None: the architecture's published size
    pretrained: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.architecture not in ARCHITECTURES:
            raise ValueError(
                f"unsupported architecture '{self.architecture}' (choose from {ARCHITECTURES})"
            )
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("epochs and batch size must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")
        if self.input_size is not None and self.input_size < 32:
            raise ValueError("input size must be at least 32")


@dataclass(frozen=True)
class ExportResult:
    view_file: Path
    weights_file: Path
    activations_dir: Path
    weights_source: str
    feature_width: int


def _sample_file_name(sample: str) -> str:
    return sample.replace("/", "__") + ".camt"


def _check_alignment(manifest: dict, folder: ImageFolder) -> None:
    if tuple(manifest["samples"]) != folder.samples:
        raise ValueError(
            "bundle manifest lists a different sample set or order than the "
            "image directory; views would not align"
        )
    names = tuple(c["name"] for c in manifest["classes"])
    if names != folder.class_names:
        raise ValueError(f"bundle class table {names} does not match folder classes {folder.class_names}")
    if tuple(manifest["labels"]) != folder.labels:
        raise ValueError("bundle labels do not match the image directory")


def fine_tune_and_export(job: ExtractorJob) -> ExportResult:
    import keras

    folder = scan_image_folder(job.data_dir)
    out_dir = Path(job.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = load_manifest(out_dir)
    if manifest is not None:
        _check_alignment(manifest, folder)
    else:
        manifest = {
            "dataset": Path(job.data_dir).name,
            "classes": [{"id": i, "name": n} for i, n in enumerate(folder.class_names)],
            "samples": list(folder.samples),
            "labels": list(folder.labels),
            "views": [],
        }

    size = job.input_size or default_input_size(job.architecture)
    keras.utils.set_random_seed(job.seed)
    built = build_model(
        job.architecture,
        size,
        len(folder.class_names),
        pretrained=job.pretrained,
        freeze_depth=job.freeze_depth,
    )
    raw = load_images(folder, size)
    x = built.preprocess(raw.copy())
    y = np.asarray(folder.labels)

    model = built.model
    model.compile(
        optimizer=keras.optimizers.SGD(learning_rate=job.learning_rate, momentum=job.momentum),
        loss="sparse_categorical_crossentropy",
    )
    model.fit(x, y, epochs=job.epochs, batch_size=job.batch_size, verbose=0)

    tap = keras.Model(
        model.input,
        [model.get_layer(built.last_conv_layer).output, model.get_layer(built.feature_layer).output],
    )
    activations, features = tap.predict(x, batch_size=job.batch_size, verbose=0)
    if not np.isfinite(features).all():
        raise ValueError(f"{job.architecture}: exported features contain non-finite values")
    if not np.isfinite(activations).all():
        raise ValueError(f"{job.architecture}: exported activations contain non-finite values")

    view_file = out_dir / f"{job.architecture}.fuse"
    write_matrix(view_file, features)

    kernel, _ = model.get_layer("predictions").get_weights()  # (d, C)
    weights_file = out_dir / f"weights_{job.architecture}.fuse"
    write_matrix(weights_file, kernel.T)

    act_dir = out_dir / "activations" / job.architecture
    act_dir.mkdir(parents=True, exist_ok=True)
    for i, sample in enumerate(folder.samples):
        write_tensor(act_dir / _sample_file_name(sample), activations[i])

    entry = {
        "name": job.architecture,
        "file": view_file.name,
        "columns": int(features.shape[1]),
        "feature_layer": built.feature_layer,
        "last_conv_layer": built.last_conv_layer,
        "input_size": size,
        "weights": built.weights_source,
    }
    manifest["views"] = [v for v in manifest["views"] if v["name"] != job.architecture]
    manifest["views"].append(entry)
    save_manifest(out_dir, manifest)
    return ExportResult(
        view_file=view_file,
        weights_file=weights_file,
        activations_dir=act_dir,
        weights_source=built.weights_source,
        feature_width=int(features.shape[1]),
    )
