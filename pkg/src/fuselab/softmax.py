"""Multinomial logistic regression trained with mini-batch SGD plus momentum.

The classifier head maps a feature vector to class probabilities through a
single affine layer followed by softmax.  Training starts from zero weights
(the loss is convex, so the seed only governs batch shuffling), accumulates
in float64 and keeps the final incomplete mini-batch of every epoch.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class SgdConfig:
    learning_rate: float = 0.0001
    momentum: float = 0.9
    epochs: int = 50
    batch_size: int = 16
    seed: int = 0
    l2: float = 0.0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.epochs <= 0:
            raise ConfigError(f"epochs must be positive, got {self.epochs}")
        if self.batch_size <= 0:
            raise ConfigError(f"batch size must be positive, got {self.batch_size}")
        if self.l2 < 0:
            raise ConfigError(f"l2 penalty must be non-negative, got {self.l2}")


@dataclass(frozen=True)
class SoftmaxModel:
    """Affine classifier parameters: weights (C x d) and biases (C,)."""

    weights: np.ndarray
    biases: np.ndarray
    class_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.biases, dtype=np.float64)
        if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
            raise ConfigError(f"inconsistent parameter shapes {w.shape} / {b.shape}")
        if w.shape[0] < 2:
            raise ConfigError("softmax model needs at least 2 classes")
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ConfigError("model parameters must be finite")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    # max-subtraction keeps exp() in range for arbitrarily large logits
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def predict_proba(model: SoftmaxModel, x: np.ndarray) -> np.ndarray:
    """Class probabilities for one feature vector or a matrix of them.

    Entries are strictly positive and each row sums to 1 (within 1e-9).
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != model.n_features:
        raise ValueError(
            f"input width {x.shape[1]} does not match model width {model.n_features}"
        )
    p = _softmax_rows(x @ model.weights.T + model.biases)
    return p[0] if single else p


def predict_labels(model: SoftmaxModel, x: np.ndarray) -> np.ndarray:
    p = predict_proba(model, np.atleast_2d(np.asarray(x, dtype=np.float64)))
    return p.argmax(axis=1)


def loss_and_gradient(
    model: SoftmaxModel, features: np.ndarray, labels: np.ndarray, l2: float = 0.0
) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    """Mean cross-entropy plus (l2/2)*||W||^2 and its exact gradient.

    Returns ``(loss, (grad_weights, grad_biases))`` with gradients shaped
    like the model parameters.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError(f"features {x.shape} and labels {y.shape} do not align")
    if x.shape[1] != model.n_features:
        raise ValueError(
            f"feature width {x.shape[1]} does not match model width {model.n_features}"
        )
    n = x.shape[0]
    p = _softmax_rows(x @ model.weights.T + model.biases)
    loss = -np.log(p[np.arange(n), y]).mean()
    loss += 0.5 * l2 * float((model.weights**2).sum())
    delta = p
    delta[np.arange(n), y] -= 1.0
    grad_w = delta.T @ x / n + l2 * model.weights
    grad_b = delta.mean(axis=0)
    return float(loss), (grad_w, grad_b)


def train_softmax(
    features: np.ndarray,
    labels: np.ndarray,
    config: SgdConfig,
    n_classes: int | None = None,
    class_names: tuple[str, ...] | None = None,
) -> SoftmaxModel:
    """Fit the classifier head; deterministic for fixed (data, config).

    ``n_classes`` widens the model beyond the classes present (useful when a
    training fold happens to miss a class id); at least two distinct labels
    must be present.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError(f"features {x.shape} and labels {y.shape} do not align")
    if x.shape[0] < 1:
        raise ValueError("need at least one training sample")
    if not np.isfinite(x).all():
        raise ValueError("training features contain non-finite values")
    present = np.unique(y)
    if present.size < 2:
        raise ValueError("fewer than 2 classes present in training labels")
    c = int(present.max()) + 1 if n_classes is None else int(n_classes)
    if c < present.max() + 1:
        raise ValueError(f"n_classes={c} smaller than largest label {present.max()}")

    rng = np.random.default_rng(config.seed)
    n, d = x.shape
    w = np.zeros((c, d))
    b = np.zeros(c)
    vel_w = np.zeros_like(w)
    vel_b = np.zeros_like(b)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            model = SoftmaxModel(w, b)
            _, (gw, gb) = loss_and_gradient(model, x[batch], y[batch], config.l2)
            vel_w = config.momentum * vel_w - config.learning_rate * gw
            vel_b = config.momentum * vel_b - config.learning_rate * gb
            w = w + vel_w
            b = b + vel_b
    return SoftmaxModel(weights=w, biases=b, class_names=class_names)


_HEADER_MAGIC = "SOFTMAX1"


def save_softmax(model: SoftmaxModel, path: Path | str) -> None:
    """Text header (shapes, class table) followed by f32 little-endian W then b."""
    lines = [_HEADER_MAGIC, f"classes {model.n_classes}", f"features {model.n_features}"]
    if model.class_names is not None:
        for i, name in enumerate(model.class_names):
            lines.append(f"name {i} {name}")
    header = "\n".join(lines) + "\nDATA\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8"))
        fh.write(model.weights.astype("<f4").tobytes())
        fh.write(model.biases.astype("<f4").tobytes())


def load_softmax(path: Path | str) -> SoftmaxModel:
    data = Path(path).read_bytes()
    sep = data.index(b"DATA\n")
    lines = data[:sep].decode("utf-8").splitlines()
    if not lines or lines[0] != _HEADER_MAGIC:
        raise ValueError(f"{path}: not a softmax model file")
    c = d = None
    names: dict[int, str] = {}
    for line in lines[1:]:
        key, _, rest = line.partition(" ")
        if key == "classes":
            c = int(rest)
        elif key == "features":
            d = int(rest)
        elif key == "name":
            idx, _, name = rest.partition(" ")
            names[int(idx)] = name
    if c is None or d is None:
        raise ValueError(f"{path}: header missing shape fields")
    payload = data[sep + len(b"DATA\n") :]
    expected = 4 * (c * d + c)
    if len(payload) != expected:
        raise ValueError(f"{path}: expected {expected} payload bytes, found {len(payload)}")
    w = np.frombuffer(payload, dtype="<f4", count=c * d).reshape(c, d)
    b = np.frombuffer(payload, dtype="<f4", offset=4 * c * d)
    class_names = tuple(names[i] for i in range(c)) if len(names) == c else None
    return SoftmaxModel(weights=w, biases=b, class_names=class_names)
