"""Majority voting over per-frame predictions from several classifier heads.

Each member casts one vote per frame; the ensemble outputs 0 only when 0 has
strictly more votes than 1, so ties classify as key frames. The ensemble
score reported alongside is the fraction of 1-votes; label logic never uses
it.
"""

from __future__ import annotations

from dataclasses import dataclass

from kfid.classifier import ClassifierHead, Prediction, predict
from kfid.errors import DataError
from kfid.features import FeatureMatrix


@dataclass(frozen=True)
class VoteTally:
    votes_for_zero: int
    votes_for_one: int

    @property
    def total(self) -> int:
        return self.votes_for_zero + self.votes_for_one

    @property
    def winner(self) -> int:
        return 0 if self.votes_for_zero > self.votes_for_one else 1


def tally_votes(votes: list[int]) -> VoteTally:
    ones = 0
    for vote in votes:
        if vote not in (0, 1):
            raise DataError(f"votes must be 0 or 1, got {vote!r}")
        ones += vote
    return VoteTally(len(votes) - ones, ones)


def majority_vote(member_predictions: list[list[int]]) -> list[int]:
    """Per-frame majority label across members; ties go to 1."""
    if not member_predictions:
        raise DataError("majority_vote needs at least one member")
    length = len(member_predictions[0])
    for i, labels in enumerate(member_predictions):
        if len(labels) != length:
            raise DataError(
                f"member {i} has {len(labels)} labels, expected {length}"
            )
    return [
        tally_votes([labels[frame] for labels in member_predictions]).winner
        for frame in range(length)
    ]


def run_ensemble(
    heads: list[ClassifierHead],
    features: FeatureMatrix,
    threshold: float = 0.5,
) -> tuple[list[Prediction], list[list[int]]]:
    """Vote the heads over a feature matrix.

    Returns the ensemble predictions (score = fraction of 1-votes) plus each
    member's raw label list for reporting.
    """
    if not heads:
        raise DataError("run_ensemble needs at least one head")
    member_labels = [
        [p.label for p in predict(head, features, threshold)] for head in heads
    ]
    voted = majority_vote(member_labels)
    predictions = []
    for i, frame_id in enumerate(features.frame_ids):
        ones = sum(labels[i] for labels in member_labels)
        predictions.append(Prediction(frame_id, ones / len(heads), voted[i]))
    return predictions, member_labels
