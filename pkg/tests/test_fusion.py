"""Majority-voting fusion tests, including an exhaustive check of all 27
three-voter vote patterns against an independently coded rule evaluator."""

import itertools

import numpy as np
import pytest

from fuselab.fusion import (
    SOFTMAX,
    SVM_POLY,
    SVM_RBF,
    FusionStrategy,
    VoterOutput,
    fuse_all_strategies,
    majority_vote,
)

VOTERS = (SOFTMAX, SVM_RBF, SVM_POLY)


def outputs_from(labels_by_voter, conf_by_voter):
    return [
        VoterOutput(voter_id=v, labels=np.asarray(labels_by_voter[v]), confidence=np.asarray(conf_by_voter[v]))
        for v in VOTERS
    ]


def expected_label(votes, confs):
    """Independent statement of the fusion rules for one sample.

    ``votes``/``confs`` are keyed by voter id in priority order: majority
    count, then highest mean confidence among tied labels, then the label of
    the highest-priority voter.
    """
    counts = {}
    for v in VOTERS:
        if v in votes:
            counts.setdefault(votes[v], []).append(v)
    best = max(len(vs) for vs in counts.values())
    tied = [lab for lab, vs in counts.items() if len(vs) == best]
    if len(tied) == 1:
        return tied[0]
    means = {lab: np.mean([confs[v] for v in counts[lab]]) for lab in tied}
    top = max(means.values())
    tied = [lab for lab in tied if means[lab] == top]
    if len(tied) == 1:
        return tied[0]
    for v in VOTERS:
        if v in votes and votes[v] in tied:
            return votes[v]
    raise AssertionError("unreachable")


class TestVoterOutput:
    def test_unknown_voter(self):
        with pytest.raises(ValueError, match="unknown voter"):
            VoterOutput("mlp", np.array([0]), np.array([0.5]))

    def test_confidence_range(self):
        with pytest.raises(ValueError, match="\\[0, 1\\]"):
            VoterOutput(SOFTMAX, np.array([0]), np.array([1.5]))

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="equal-length"):
            VoterOutput(SOFTMAX, np.array([0, 1]), np.array([0.5]))


class TestMajorityVote:
    def test_strict_majority(self):
        outs = outputs_from(
            {SOFTMAX: [0], SVM_RBF: [0], SVM_POLY: [1]},
            {SOFTMAX: [0.5], SVM_RBF: [0.5], SVM_POLY: [0.99]},
        )
        assert majority_vote(outs, FusionStrategy.ALL).tolist() == [0]

    def test_three_way_tie_goes_to_confidence(self):
        outs = outputs_from(
            {SOFTMAX: [0], SVM_RBF: [1], SVM_POLY: [2]},
            {SOFTMAX: [0.9], SVM_RBF: [0.8], SVM_POLY: [0.7]},
        )
        assert majority_vote(outs, FusionStrategy.ALL).tolist() == [0]

    def test_two_voter_tie_falls_back_to_priority(self):
        outs = outputs_from(
            {SOFTMAX: [0], SVM_RBF: [1], SVM_POLY: [2]},
            {SOFTMAX: [0.6], SVM_RBF: [0.6], SVM_POLY: [0.1]},
        )
        assert majority_vote(outs, FusionStrategy.SOFTMAX_RBF).tolist() == [0]

    def test_missing_voter(self):
        outs = outputs_from(
            {SOFTMAX: [0], SVM_RBF: [0], SVM_POLY: [0]},
            {SOFTMAX: [0.5], SVM_RBF: [0.5], SVM_POLY: [0.5]},
        )
        with pytest.raises(ValueError, match="missing voters \\['svm_poly'\\]"):
            majority_vote(outs[:2], FusionStrategy.SOFTMAX_POLY)

    def test_length_mismatch_between_voters(self):
        outs = [
            VoterOutput(SOFTMAX, np.array([0, 1]), np.array([0.5, 0.5])),
            VoterOutput(SVM_RBF, np.array([0]), np.array([0.5])),
        ]
        with pytest.raises(ValueError, match="covers 1 samples"):
            majority_vote(outs, FusionStrategy.SOFTMAX_RBF)


class TestExhaustivePatterns:
    def test_all_27_patterns_with_fixed_confidences(self):
        """With confidences fixed at softmax .9 > rbf .8 > poly .7, every
        pattern resolves to the majority label, or the softmax label when
        all three disagree; spelled out as a literal table."""
        table = {}
        for pattern in itertools.product(range(3), repeat=3):
            sm, rbf, poly = pattern
            if rbf == poly and sm != rbf:
                want = rbf
            else:
                want = sm
            table[pattern] = want
        assert len(table) == 27
        for pattern, want in table.items():
            outs = outputs_from(
                {SOFTMAX: [pattern[0]], SVM_RBF: [pattern[1]], SVM_POLY: [pattern[2]]},
                {SOFTMAX: [0.9], SVM_RBF: [0.8], SVM_POLY: [0.7]},
            )
            assert majority_vote(outs, FusionStrategy.ALL).tolist() == [want], pattern

    def test_all_27_patterns_with_random_confidences(self):
        rng = np.random.default_rng(123)
        for pattern in itertools.product(range(3), repeat=3):
            confs = {v: round(float(c), 6) for v, c in zip(VOTERS, rng.random(3))}
            votes = dict(zip(VOTERS, pattern))
            outs = outputs_from(
                {v: [votes[v]] for v in VOTERS}, {v: [confs[v]] for v in VOTERS}
            )
            got = majority_vote(outs, FusionStrategy.ALL)[0]
            assert got == expected_label(votes, confs), (pattern, confs)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(7)
        for pattern in itertools.product(range(3), repeat=3):
            confs = rng.random(3)
            outs = outputs_from(
                {v: [p] for v, p in zip(VOTERS, pattern)},
                {v: [c] for v, c in zip(VOTERS, confs)},
            )
            reference = majority_vote(outs, FusionStrategy.ALL)[0]
            for perm in itertools.permutations(outs):
                assert majority_vote(list(perm), FusionStrategy.ALL)[0] == reference

    def test_fused_label_received_a_vote(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            votes = rng.integers(0, 4, size=3)
            outs = outputs_from(
                {v: [votes[i]] for i, v in enumerate(VOTERS)},
                {v: [rng.random()] for v in VOTERS},
            )
            for strategy in FusionStrategy:
                fused = majority_vote(outs, strategy)[0]
                allowed = {int(votes[i]) for i, v in enumerate(VOTERS) if v in strategy.voters}
                assert fused in allowed


class TestFuseAllStrategies:
    def test_unanimous(self):
        outs = outputs_from(
            {v: [2, 0, 1] for v in VOTERS}, {v: [0.5, 0.6, 0.7] for v in VOTERS}
        )
        fused = fuse_all_strategies(outs)
        for strategy in FusionStrategy:
            assert fused[strategy].tolist() == [2, 0, 1]

    def test_softmax_always_wins_when_others_copy_it(self):
        rng = np.random.default_rng(5)
        labels = rng.integers(0, 3, size=10)
        outs = outputs_from(
            {v: labels for v in VOTERS},
            {v: rng.random(10) for v in VOTERS},
        )
        fused = fuse_all_strategies(outs)
        for strategy in (FusionStrategy.SOFTMAX_RBF, FusionStrategy.SOFTMAX_POLY, FusionStrategy.ALL):
            assert np.array_equal(fused[strategy], labels)

    def test_crafted_disagreement(self):
        """Three samples covering majority, confidence tie-break and
        priority fallback, against hand-worked expectations."""
        outs = outputs_from(
            {SOFTMAX: [0, 0, 0], SVM_RBF: [1, 1, 1], SVM_POLY: [1, 2, 0]},
            {SOFTMAX: [0.9, 0.3, 0.2], SVM_RBF: [0.2, 0.8, 0.2], SVM_POLY: [0.3, 0.4, 0.9]},
        )
        fused = fuse_all_strategies(outs)
        # sample 0: rbf+poly majority on 1; sample 1: all distinct, rbf most
        # confident; sample 2: softmax+poly majority on 0
        assert fused[FusionStrategy.ALL].tolist() == [1, 1, 0]
        # two-voter strategy: disagreement with equal confidence -> priority
        outs_eq = outputs_from(
            {SOFTMAX: [0], SVM_RBF: [2], SVM_POLY: [2]},
            {SOFTMAX: [0.6], SVM_RBF: [0.6], SVM_POLY: [0.6]},
        )
        assert majority_vote(outs_eq, FusionStrategy.SOFTMAX_RBF).tolist() == [0]
