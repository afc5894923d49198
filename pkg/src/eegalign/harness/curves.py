"""Learning-curve summaries."""
from __future__ import annotations

import numpy as np

from ..exceptions import InvariantError


def auc_curve(checkpoints, values=None) -> float:
    """Trapezoidal area under a learning curve divided by the span of its x axis.

    Accepts either a mapping ``{checkpoint: value}`` or two sequences. A
    constant curve at ``a`` yields exactly ``a``.
    """
    if values is None:
        items = sorted(dict(checkpoints).items())
        x = np.array([k for k, _ in items], dtype=np.float64)
        y = np.array([v for _, v in items], dtype=np.float64)
    else:
        x = np.asarray(checkpoints, dtype=np.float64)
        y = np.asarray(values, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InvariantError("checkpoints and values must be equal-length vectors")
    if len(x) < 2:
        raise InvariantError("area under a curve needs at least 2 checkpoints")
    if np.any(np.diff(x) <= 0):
        raise InvariantError("checkpoints must be strictly increasing")
    if np.all(y == y[0]):
        return float(y[0])
    area = np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2)
    return float(area / (x[-1] - x[0]))
