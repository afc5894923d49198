"""Paired-sample t-test."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.special import betainc

from ..exceptions import InvariantError


class TTestResult(NamedTuple):
    t: float
    p: float
    df: int


def student_t_sf2(t: float, df: float) -> float:
    """Two-sided tail probability ``P(|T| >= |t|)`` for Student's t.

    Uses the regularized incomplete beta identity
    ``P(|T| >= t) = I_{df/(df+t^2)}(df/2, 1/2)``.
    """
    if not df > 0:
        raise ValueError("degrees of freedom must be positive")
    if np.isinf(t):
        return 0.0
    return float(betainc(df / 2, 0.5, df / (df + t * t)))


def paired_t_test(a, b) -> TTestResult:
    """Paired t-test of ``a - b`` against zero mean, two-sided."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise InvariantError(f"paired samples must be equal-length vectors, got {a.shape} and {b.shape}")
    n = len(a)
    if n < 2:
        raise InvariantError("paired t-test needs at least 2 pairs")
    d = a - b
    sd = np.std(d, ddof=1)
    if sd == 0:
        raise InvariantError("paired differences have zero variance; t is undefined")
    t = float(np.mean(d) / (sd / np.sqrt(n)))
    return TTestResult(t, student_t_sf2(t, n - 1), n - 1)
