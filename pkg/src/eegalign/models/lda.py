"""Two-class Fisher linear discriminant."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import InvariantError

RIDGE = 1e-6


@dataclass(frozen=True, eq=False)
class LDAModel:
    w: np.ndarray
    b: float
    classes: tuple
    """(negative, positive) class ids; ``w.x + b > 0`` predicts the positive one."""

    def decision_function(self, F) -> np.ndarray:
        return np.asarray(F, dtype=np.float64) @ self.w + self.b


def lda_fit(features, labels) -> LDAModel:
    """``w = Sw^{-1} (mu_pos - mu_neg)`` with a small ridge on the pooled scatter."""
    F = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    classes = tuple(int(c) for c in np.unique(labels))
    if len(classes) != 2:
        raise InvariantError(f"LDA needs exactly 2 classes, got {classes}")
    groups = [F[labels == c] for c in classes]
    for c, g in zip(classes, groups):
        if len(g) < 2:
            raise InvariantError(f"class {c} has {len(g)} sample(s); LDA needs at least 2")
    mus = [g.mean(axis=0) for g in groups]
    Sw = sum((g - mu).T @ (g - mu) for g, mu in zip(groups, mus))
    d = F.shape[1]
    Sw = Sw + RIDGE * np.trace(Sw) / d * np.eye(d)
    w = np.linalg.solve(Sw, mus[1] - mus[0])
    b = -float(w @ (mus[0] + mus[1])) / 2
    if not (np.all(np.isfinite(w)) and np.isfinite(b)):
        raise InvariantError("LDA produced non-finite weights")
    return LDAModel(w, b, classes)


def lda_predict(features, model: LDAModel):
    F = np.asarray(features, dtype=np.float64)
    scores = model.decision_function(F)
    pred = np.where(scores > 0, model.classes[1], model.classes[0])
    return int(pred) if F.ndim == 1 else pred
