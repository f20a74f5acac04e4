"""Synthetic multi-view Gaussian-blob bundles for desk-scale experiments.

Views are configured with explicit per-class mean vectors, so a view can be
made to collapse chosen classes onto one blob.  The ``complementary_spec``
preset builds two such views whose merged class pairs differ; neither view
separates all classes on its own but their concatenation does, which is the
testbed for the fusion experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundle import BundleManifest, ClassLabel, FeatureBundle, FeatureView


@dataclass(frozen=True)
class SyntheticView:
    """One generated view: width, per-class mean vectors and noise scale."""

    name: str
    class_means: np.ndarray  # (n_classes, width)
    noise_scale: float

    def __post_init__(self) -> None:
        means = np.asarray(self.class_means, dtype=np.float64)
        if means.ndim != 2 or means.shape[1] < 1:
            raise ValueError(f"view '{self.name}': class_means must be (C, width>0)")
        if self.noise_scale < 0:
            raise ValueError(f"view '{self.name}': noise scale must be >= 0")
        object.__setattr__(self, "class_means", means)

    @property
    def width(self) -> int:
        return self.class_means.shape[1]


@dataclass(frozen=True)
class SyntheticSpec:
    dataset: str
    class_names: tuple[str, ...]
    class_sizes: tuple[int, ...]
    views: tuple[SyntheticView, ...]

    def __post_init__(self) -> None:
        c = len(self.class_names)
        if c < 2:
            raise ValueError("need at least 2 classes")
        if len(self.class_sizes) != c:
            raise ValueError("class_sizes length must match class_names")
        if any(s <= 0 for s in self.class_sizes):
            raise ValueError(f"class sizes must be positive, got {self.class_sizes}")
        if not self.views:
            raise ValueError("need at least one view")
        for v in self.views:
            if v.class_means.shape[0] != c:
                raise ValueError(
                    f"view '{v.name}' has means for {v.class_means.shape[0]} classes, expected {c}"
                )


def generate_synthetic(spec: SyntheticSpec, seed: int) -> FeatureBundle:
    """Draw Gaussian blobs per class per view; deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    labels = np.concatenate(
        [np.full(n, i, dtype=np.int64) for i, n in enumerate(spec.class_sizes)]
    )
    n_total = labels.shape[0]
    views = []
    for vs in spec.views:
        m = np.empty((n_total, vs.width), dtype=np.float64)
        row = 0
        for cls, size in enumerate(spec.class_sizes):
            noise = rng.normal(0.0, 1.0, size=(size, vs.width)) * vs.noise_scale
            m[row : row + size] = vs.class_means[cls] + noise
            row += size
        views.append(FeatureView(name=vs.name, matrix=m.astype(np.float32)))
    manifest = BundleManifest(
        dataset=spec.dataset,
        classes=tuple(ClassLabel(i, name) for i, name in enumerate(spec.class_names)),
        samples=tuple(f"s{i:05d}" for i in range(n_total)),
    )
    return FeatureBundle(manifest=manifest, views=tuple(views), labels=labels)


def complementary_spec(
    class_sizes: tuple[int, int, int] = (50, 50, 50),
    width: int = 6,
    separation: float = 3.0,
    noise_scale: float = 0.5,
) -> SyntheticSpec:
    """Three classes, two views with complementary blind spots.

    View "alpha" puts classes 1 and 2 on the same mean (separates only class
    0); view "beta" merges classes 0 and 1 (separates only class 2).  The
    concatenation gives all three classes distinct means, so a fused model
    can reach what no single view can.
    """
    if width < 1:
        raise ValueError("width must be positive")
    e0 = np.zeros(width)
    e0[0] = separation
    means_alpha = np.stack([e0, -e0, -e0])
    means_beta = np.stack([e0, e0, -e0])
    return SyntheticSpec(
        dataset="complementary",
        class_names=("class_a", "class_b", "class_c"),
        class_sizes=tuple(class_sizes),
        views=(
            SyntheticView("alpha", means_alpha, noise_scale),
            SyntheticView("beta", means_beta, noise_scale),
        ),
    )
