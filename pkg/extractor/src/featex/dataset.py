"""Image-folder datasets: one subfolder per class, lexicographic sample order."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp"}


@dataclass(frozen=True)
class ImageFolder:
    root: Path
    samples: tuple[str, ...]  # relative paths, lexicographic order
    labels: tuple[int, ...]
    class_names: tuple[str, ...]

    @property
    def n_samples(self) -> int:
        return len(self.samples)


def scan_image_folder(root: Path | str) -> ImageFolder:
    """Classes are the sorted subfolder names; samples are all image files,
    ordered by their relative path.  That order is the alignment contract
    across successive extraction runs."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"image directory not found: {root}")
    classes = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        images = [p for p in sub.rglob("*") if p.suffix.lower() in IMAGE_SUFFIXES]
        if images:
            classes.append(sub.name)
    if len(classes) < 2:
        raise ValueError(f"{root}: need at least 2 class folders with images, found {len(classes)}")
    class_ids = {name: i for i, name in enumerate(classes)}
    entries = []
    for name in classes:
        for p in (root / name).rglob("*"):
            if p.suffix.lower() in IMAGE_SUFFIXES:
                entries.append((p.relative_to(root).as_posix(), class_ids[name]))
    entries.sort(key=lambda item: item[0])
    samples, labels = zip(*entries)
    return ImageFolder(root=root, samples=samples, labels=labels, class_names=tuple(classes))


def load_images(folder: ImageFolder, size: int) -> np.ndarray:
    """All images as one (n, size, size, 3) float32 array in [0, 255]."""
    out = np.empty((folder.n_samples, size, size, 3), dtype=np.float32)
    for i, rel in enumerate(folder.samples):
        path = folder.root / rel
        try:
            with Image.open(path) as img:
                rgb = img.convert("RGB").resize((size, size), Image.BILINEAR)
        except Exception as e:
            raise ValueError(f"unreadable image {path}: {e}") from e
        out[i] = np.asarray(rgb, dtype=np.float32)
    return out
