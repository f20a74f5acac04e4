"""Image-folder scanning tests."""

import numpy as np
import pytest
from PIL import Image

from featex.dataset import load_images, scan_image_folder


def make_folder(root, per_class=3, classes=("covid", "normal", "pneumonia"), size=16):
    rng = np.random.default_rng(0)
    for cls in classes:
        d = root / cls
        d.mkdir(parents=True)
        for i in range(per_class):
            img = Image.fromarray(rng.integers(0, 255, size=(size, size, 3), dtype=np.uint8))
            img.save(d / f"img_{i:03d}.png")
    return root


def test_lexicographic_order_and_labels(tmp_path):
    make_folder(tmp_path)
    folder = scan_image_folder(tmp_path)
    assert folder.class_names == ("covid", "normal", "pneumonia")
    assert list(folder.samples) == sorted(folder.samples)
    assert folder.samples[0].startswith("covid/")
    assert folder.labels[0] == 0 and folder.labels[-1] == 2
    assert folder.n_samples == 9


def test_rescan_is_stable(tmp_path):
    make_folder(tmp_path)
    a = scan_image_folder(tmp_path)
    b = scan_image_folder(tmp_path)
    assert a.samples == b.samples
    assert a.labels == b.labels


def test_fewer_than_two_classes(tmp_path):
    make_folder(tmp_path, classes=("only",))
    with pytest.raises(ValueError, match="at least 2 class folders"):
        scan_image_folder(tmp_path)


def test_missing_directory(tmp_path):
    with pytest.raises(FileNotFoundError):
        scan_image_folder(tmp_path / "absent")


def test_load_images_shape_and_range(tmp_path):
    make_folder(tmp_path, per_class=2)
    folder = scan_image_folder(tmp_path)
    batch = load_images(folder, size=32)
    assert batch.shape == (6, 32, 32, 3)
    assert batch.dtype == np.float32
    assert batch.min() >= 0.0 and batch.max() <= 255.0


def test_unreadable_image(tmp_path):
    make_folder(tmp_path, per_class=1)
    bad = tmp_path / "covid" / "broken.png"
    bad.write_bytes(b"not an image at all")
    folder = scan_image_folder(tmp_path)
    with pytest.raises(ValueError, match="unreadable image.*broken.png"):
        load_images(folder, size=32)
