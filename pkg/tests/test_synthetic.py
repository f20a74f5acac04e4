"""Synthetic generator tests, checked against a nearest-centroid oracle."""

import numpy as np
import pytest

from fuselab.bundle import concatenate_views
from fuselab.synthetic import (
    SyntheticSpec,
    SyntheticView,
    complementary_spec,
    generate_synthetic,
)


def nearest_centroid_accuracy(matrix, labels):
    """Independent oracle: classify by the closest empirical class mean."""
    classes = np.unique(labels)
    centroids = np.stack([matrix[labels == c].mean(axis=0) for c in classes])
    dists = ((matrix[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    pred = classes[dists.argmin(axis=1)]
    return float((pred == labels).mean())


def test_shapes():
    spec = SyntheticSpec(
        dataset="d",
        class_names=("a", "b", "c"),
        class_sizes=(50, 50, 50),
        views=(
            SyntheticView("u", np.zeros((3, 4)), 1.0),
            SyntheticView("w", np.ones((3, 2)), 1.0),
        ),
    )
    bundle = generate_synthetic(spec, seed=0)
    assert bundle.n_samples == 150
    assert [v.width for v in bundle.views] == [4, 2]
    assert np.bincount(bundle.labels).tolist() == [50, 50, 50]


def test_zero_noise_hits_class_means():
    means = np.array([[1.0, -2.0], [3.0, 4.0]])
    spec = SyntheticSpec(
        dataset="d",
        class_names=("a", "b"),
        class_sizes=(3, 2),
        views=(SyntheticView("u", means, 0.0),),
    )
    bundle = generate_synthetic(spec, seed=5)
    m = bundle.view("u").matrix
    for i, lab in enumerate(bundle.labels):
        assert np.array_equal(m[i], means[lab].astype(np.float32))


def test_deterministic():
    spec = complementary_spec()
    a = generate_synthetic(spec, seed=11)
    b = generate_synthetic(spec, seed=11)
    for name in a.view_names:
        assert np.array_equal(a.view(name).matrix, b.view(name).matrix)


def test_complementary_views_fuse():
    """Neither view separates all classes; the concatenation does."""
    bundle = generate_synthetic(complementary_spec(), seed=11)
    labels = bundle.labels
    acc_alpha = nearest_centroid_accuracy(bundle.view("alpha").matrix.astype(float), labels)
    acc_beta = nearest_centroid_accuracy(bundle.view("beta").matrix.astype(float), labels)
    acc_cat = nearest_centroid_accuracy(
        concatenate_views(bundle, ["alpha", "beta"]).matrix.astype(float), labels
    )
    assert acc_alpha < 1.0
    assert acc_beta < 1.0
    assert acc_cat == 1.0


def test_invalid_specs():
    with pytest.raises(ValueError, match="positive"):
        SyntheticSpec(
            dataset="d",
            class_names=("a", "b"),
            class_sizes=(3, 0),
            views=(SyntheticView("u", np.zeros((2, 1)), 1.0),),
        )
    with pytest.raises(ValueError, match="at least one view"):
        SyntheticSpec(dataset="d", class_names=("a", "b"), class_sizes=(3, 3), views=())
    with pytest.raises(ValueError, match="noise"):
        SyntheticView("u", np.zeros((2, 1)), -1.0)
