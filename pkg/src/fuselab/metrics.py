"""Confusion-matrix metrics: precision, recall, F1, accuracy, Cohen's kappa,
and mean(std) aggregation across cross-validation folds.

Zero-denominator cases never raise and never produce NaN; they yield 0 with
a ``degenerate`` flag so reports over small or vanished classes stay
well-formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    """C x C counts; rows are true classes, columns predicted classes."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.counts, dtype=np.int64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"confusion matrix must be square, got {m.shape}")
        if (m < 0).any():
            raise ValueError("confusion matrix counts must be non-negative")
        m.setflags(write=False)
        object.__setattr__(self, "counts", m)

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def true_positives(self, c: int) -> int:
        return int(self.counts[c, c])

    def false_positives(self, c: int) -> int:
        return int(self.counts[:, c].sum() - self.counts[c, c])

    def false_negatives(self, c: int) -> int:
        return int(self.counts[c, :].sum() - self.counts[c, c])

    def true_negatives(self, c: int) -> int:
        return self.total - self.true_positives(c) - self.false_positives(c) - self.false_negatives(c)


def confusion(y_true, y_pred, n_classes: int) -> ConfusionMatrix:
    """counts[i][j] = number of samples with true class i predicted as j."""
    t = np.asarray(y_true, dtype=np.int64)
    p = np.asarray(y_pred, dtype=np.int64)
    if t.shape != p.shape or t.ndim != 1:
        raise ValueError(f"label vectors must align, got {t.shape} and {p.shape}")
    if t.size == 0:
        raise ValueError("need at least one sample")
    if (t < 0).any() or (t >= n_classes).any():
        raise ValueError("true labels contain ids outside 0..C-1")
    if (p < 0).any() or (p >= n_classes).any():
        raise ValueError("predicted labels contain ids outside 0..C-1")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    return ConfusionMatrix(counts)


@dataclass(frozen=True)
class ClassMetrics:
    """Per-class precision, recall and F1 as fractions in [0, 1]."""

    precision: float
    recall: float
    f1: float
    degenerate: bool


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean 2PR/(P+R); 0 when both are 0.  Scale-invariant, so it
    accepts fractions or percentages alike."""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def class_metrics(cm: ConfusionMatrix) -> list[ClassMetrics]:
    out = []
    for c in range(cm.n_classes):
        tp = cm.true_positives(c)
        fp = cm.false_positives(c)
        fn = cm.false_negatives(c)
        degenerate = False
        if tp + fp == 0:
            precision, degenerate = 0.0, True
        else:
            precision = tp / (tp + fp)
        if tp + fn == 0:
            recall, degenerate = 0.0, True
        else:
            recall = tp / (tp + fn)
        if precision + recall == 0:
            degenerate = True
        out.append(
            ClassMetrics(
                precision=precision,
                recall=recall,
                f1=f1_score(precision, recall),
                degenerate=degenerate,
            )
        )
    return out


def accuracy(cm: ConfusionMatrix) -> float:
    return float(np.trace(cm.counts)) / cm.total


def agreement_rates(cm: ConfusionMatrix) -> tuple[float, float]:
    """(observed agreement p_o, chance agreement p_e) for Cohen's kappa."""
    n = cm.total
    p_o = float(np.trace(cm.counts)) / n
    rows = cm.counts.sum(axis=1).astype(np.float64)
    cols = cm.counts.sum(axis=0).astype(np.float64)
    p_e = float(rows @ cols) / (n * n)
    return p_o, p_e


@dataclass(frozen=True)
class KappaResult:
    value: float
    observed: float
    expected: float
    degenerate: bool


def kappa(cm: ConfusionMatrix) -> KappaResult:
    """Cohen's kappa (p_o - p_e) / (1 - p_e); 0 with a flag when p_e = 1."""
    p_o, p_e = agreement_rates(cm)
    if p_e == 1.0:
        return KappaResult(value=0.0, observed=p_o, expected=p_e, degenerate=True)
    return KappaResult(value=(p_o - p_e) / (1.0 - p_e), observed=p_o, expected=p_e, degenerate=False)


@dataclass(frozen=True)
class FoldSummary:
    """Per-fold values with their mean and sample (k-1) standard deviation."""

    values: tuple[float, ...]
    mean: float
    std: float


def aggregate_folds(values) -> FoldSummary:
    vals = tuple(float(v) for v in values)
    if len(vals) < 2:
        raise ValueError(f"need at least 2 fold values, got {len(vals)}")
    arr = np.asarray(vals, dtype=np.float64)
    return FoldSummary(values=vals, mean=float(arr.mean()), std=float(arr.std(ddof=1)))


def round_half_away(x: float, ndigits: int) -> float:
    """Decimal rounding with halves away from zero (display convention)."""
    factor = 10.0**ndigits
    return math.copysign(math.floor(abs(x) * factor + 0.5) / factor, x)


def format_mean_std(summary: FoldSummary) -> str:
    """Grid-cell rendering "M.M (S.S)" with one decimal each."""
    return f"{round_half_away(summary.mean, 1):.1f} ({round_half_away(summary.std, 1):.1f})"


def format_percent(fraction: float) -> str:
    """Per-class table rendering: percentage with two decimals."""
    return f"{round_half_away(100.0 * fraction, 2):.2f}"
