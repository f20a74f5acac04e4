"""Decision-level fusion: hard-label majority voting over classifier subsets.

Voters are identified by name (softmax, svm_rbf, svm_poly) and the four
strategies are fixed subsets of them.  Votes are hard labels; confidences
are used only to break ties:

1. the label with the most votes wins;
2. vote ties go to the tied label with the highest mean confidence among
   the voters that chose it;
3. residual ties go to the label chosen by the highest-priority voter
   (softmax > svm_rbf > svm_poly).

The result depends only on voter ids, never on list order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

SOFTMAX = "softmax"
SVM_RBF = "svm_rbf"
SVM_POLY = "svm_poly"

_PRIORITY = {SOFTMAX: 0, SVM_RBF: 1, SVM_POLY: 2}


class FusionStrategy(Enum):
    RBF_POLY = (SVM_RBF, SVM_POLY)
    SOFTMAX_RBF = (SOFTMAX, SVM_RBF)
    SOFTMAX_POLY = (SOFTMAX, SVM_POLY)
    ALL = (SOFTMAX, SVM_RBF, SVM_POLY)

    @property
    def voters(self) -> tuple[str, ...]:
        return self.value


@dataclass(frozen=True)
class VoterOutput:
    """One classifier's hard labels and per-sample confidence in [0, 1]."""

    voter_id: str
    labels: np.ndarray
    confidence: np.ndarray

    def __post_init__(self) -> None:
        if self.voter_id not in _PRIORITY:
            raise ValueError(f"unknown voter id '{self.voter_id}'")
        labels = np.asarray(self.labels, dtype=np.int64)
        conf = np.asarray(self.confidence, dtype=np.float64)
        if labels.shape != conf.shape or labels.ndim != 1:
            raise ValueError(
                f"labels {labels.shape} and confidence {conf.shape} must be equal-length vectors"
            )
        if (labels < 0).any():
            raise ValueError("labels must be non-negative class ids")
        if ((conf < 0) | (conf > 1)).any():
            raise ValueError("confidences must lie in [0, 1]")
        labels.setflags(write=False)
        conf.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "confidence", conf)


def majority_vote(outputs: list[VoterOutput], strategy: FusionStrategy) -> np.ndarray:
    """Fuse the strategy's voters into one hard label per sample."""
    by_id = {}
    for out in outputs:
        if out.voter_id in by_id:
            raise ValueError(f"duplicate voter '{out.voter_id}'")
        by_id[out.voter_id] = out
    missing = [v for v in strategy.voters if v not in by_id]
    if missing:
        raise ValueError(f"strategy {strategy.name} is missing voters {missing}")
    chosen = [by_id[v] for v in sorted(strategy.voters, key=_PRIORITY.get)]
    n = chosen[0].labels.shape[0]
    for out in chosen:
        if out.labels.shape[0] != n:
            raise ValueError(
                f"voter '{out.voter_id}' covers {out.labels.shape[0]} samples, expected {n}"
            )
    fused = np.empty(n, dtype=np.int64)
    for s in range(n):
        votes: dict[int, list[float]] = {}
        for out in chosen:  # already in priority order
            votes.setdefault(int(out.labels[s]), []).append(float(out.confidence[s]))
        top_count = max(len(v) for v in votes.values())
        tied = [lab for lab, v in votes.items() if len(v) == top_count]
        if len(tied) > 1:
            best_conf = max(float(np.mean(votes[lab])) for lab in tied)
            tied = [lab for lab in tied if float(np.mean(votes[lab])) == best_conf]
        if len(tied) > 1:
            for out in chosen:
                if int(out.labels[s]) in tied:
                    tied = [int(out.labels[s])]
                    break
        fused[s] = tied[0]
    return fused


def fuse_all_strategies(outputs: list[VoterOutput]) -> dict[FusionStrategy, np.ndarray]:
    """All four strategies at once; requires all three voters present."""
    return {strategy: majority_vote(outputs, strategy) for strategy in FusionStrategy}
