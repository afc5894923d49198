"""Classification metrics: accuracy and balanced classification accuracy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import InvariantError


def _paired(predictions, labels):
    pred = np.asarray(predictions)
    true = np.asarray(labels)
    if pred.shape != true.shape or pred.ndim != 1:
        raise InvariantError(f"predictions {pred.shape} and labels {true.shape} must be equal-length vectors")
    if pred.size == 0:
        raise InvariantError("metric of an empty prediction set")
    return pred, true


def accuracy(predictions, labels) -> float:
    """Fraction of predictions equal to the labels."""
    pred, true = _paired(predictions, labels)
    return float(np.mean(pred == true))


@dataclass(frozen=True)
class ConfusionCounts:
    """Per-class tallies for a binary problem.

    ``m_pos``/``m_neg`` are the true class sizes and ``n_pos``/``n_neg`` the
    number of correctly classified trials in each class.
    """

    m_pos: int
    m_neg: int
    n_pos: int
    n_neg: int

    def __post_init__(self):
        for name in ("m_pos", "m_neg", "n_pos", "n_neg"):
            if int(getattr(self, name)) < 0:
                raise InvariantError(f"{name} must be nonnegative")
        if self.n_pos > self.m_pos or self.n_neg > self.m_neg:
            raise InvariantError(f"correct counts exceed class sizes: {self}")

    @classmethod
    def from_predictions(cls, predictions, labels, positive=1) -> "ConfusionCounts":
        pred, true = _paired(predictions, labels)
        pos = true == positive
        return cls(
            m_pos=int(pos.sum()),
            m_neg=int((~pos).sum()),
            n_pos=int(np.sum(pred[pos] == positive)),
            n_neg=int(np.sum(pred[~pos] == true[~pos])),
        )

    @property
    def a_pos(self) -> float:
        return self.n_pos / self.m_pos

    @property
    def a_neg(self) -> float:
        return self.n_neg / self.m_neg


def bca(counts: ConfusionCounts) -> float:
    """Balanced classification accuracy, the mean of the two per-class accuracies."""
    if counts.m_pos == 0 or counts.m_neg == 0:
        raise InvariantError("balanced accuracy needs both classes in the ground truth")
    return (counts.a_pos + counts.a_neg) / 2


def balanced_accuracy(predictions, labels) -> float:
    """Mean per-class accuracy over the classes present in ``labels``.

    For two classes this equals :func:`bca` of the matching counts.
    """
    pred, true = _paired(predictions, labels)
    classes = np.unique(true)
    if len(classes) < 2:
        raise InvariantError("balanced accuracy needs at least two classes in the ground truth")
    return float(np.mean([np.mean(pred[true == c] == c) for c in classes]))
