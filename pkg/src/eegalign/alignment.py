"""Trial covariances, reference matrices, and the EA / RA alignment operators.

EA (Euclidean alignment) whitens the trials themselves,
``X_i <- R^{-1/2} X_i`` with ``R`` the arithmetic mean of the subject's trial
covariances; afterwards the mean covariance is the identity. RA (Riemannian
alignment) applies the congruence ``S_i <- R^{-1/2} S_i R^{-1/2}`` to
covariance matrices, with ``R`` a Riemannian mean.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import spd
from .data import Trial, as_array
from .exceptions import InvariantError, NotPositiveDefiniteError

REFERENCE_KINDS = ("RR", "ER", "RI", "EI")
AUTO_SHRINK = 0.01


def _check_epsilon(eps: float) -> float:
    eps = float(eps)
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"shrinkage must lie in [0, 1), got {eps}")
    return eps


def default_shrinkage(n_channels: int, n_samples: int) -> float:
    """0 when the trial has at least as many samples as channels, else 0.01."""
    return 0.0 if n_samples >= n_channels else AUTO_SHRINK


def covariances(trials, shrink: Optional[float] = None) -> np.ndarray:
    """Per-trial ``X X^T`` with optional shrinkage towards a scaled identity.

    No mean removal and no division by the sample count. ``shrink=None``
    picks :func:`default_shrinkage`.

    Returns
    -------
    ndarray, shape (n_trials, n_channels, n_channels)
    """
    X = as_array(trials)
    n_channels, n_samples = X.shape[1:]
    eps = default_shrinkage(n_channels, n_samples) if shrink is None else _check_epsilon(shrink)
    C = X @ np.swapaxes(X, 1, 2)
    if eps:
        scale = np.trace(C, axis1=1, axis2=2) / n_channels
        C = (1 - eps) * C + eps * scale[:, None, None] * np.eye(n_channels)
    # positive definiteness check, one batched Cholesky
    try:
        np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        bad = [i for i, c in enumerate(C) if np.linalg.eigvalsh(c)[0] <= 0]
        raise NotPositiveDefiniteError(
            f"covariance of trial(s) {bad[:10]} is not positive definite "
            f"(shrinkage {eps}); degenerate trial or too few samples"
        ) from None
    return C


def covariance(trial, shrink: Optional[float] = None) -> np.ndarray:
    """Covariance ``X X^T`` of a single trial (Trial or 2-D array)."""
    data = trial.data if isinstance(trial, Trial) else np.asarray(trial, dtype=np.float64)
    return covariances(data[None], shrink)[0]


@dataclass(frozen=True, eq=False)
class ReferenceMatrix:
    """An SPD reference together with how it was estimated.

    ``kind`` is one of RR, ER, RI, EI: Riemannian or Euclidean mean over
    resting or task trials.
    """

    matrix: np.ndarray
    kind: str
    n_source_trials: int
    shrink: Optional[float] = None
    mean_info: Optional[spd.MeanResult] = None

    def __post_init__(self):
        if self.kind not in REFERENCE_KINDS:
            raise ValueError(f"reference kind must be one of {REFERENCE_KINDS}, got {self.kind!r}")
        m = np.array(self.matrix, dtype=np.float64)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def is_riemannian(self) -> bool:
        return self.kind[0] == "R"

    @property
    def invsqrt(self) -> np.ndarray:
        return spd.spd_invsqrt(self.matrix)


def reference_from_covariances(covs, kind: str, shrink=None, tol=spd.MEAN_TOL,
                               max_iter=spd.MEAN_MAX_ITER, warn: bool = True) -> ReferenceMatrix:
    covs = np.asarray(covs, dtype=np.float64)
    if len(covs) == 0:
        raise InvariantError("reference matrix from an empty trial set")
    if kind not in REFERENCE_KINDS:
        raise ValueError(f"reference kind must be one of {REFERENCE_KINDS}, got {kind!r}")
    if kind[0] == "R":
        res = spd.riemannian_mean(covs, tol=tol, max_iter=max_iter, warn=warn)
        return ReferenceMatrix(res.mean, kind, len(covs), shrink, res)
    return ReferenceMatrix(spd.arithmetic_mean(covs), kind, len(covs), shrink)


def build_reference(trials, kind: str = "EI", shrink: Optional[float] = None,
                    tol: float = spd.MEAN_TOL, max_iter: int = spd.MEAN_MAX_ITER) -> ReferenceMatrix:
    """Reference matrix of a subject.

    The caller picks the trials: resting epochs for RR/ER, task epochs for
    RI/EI. ``E*`` kinds average the covariances arithmetically, ``R*`` kinds
    take their Riemannian mean (passing only non-target ERP trials with an R
    kind gives the usual ERP reference).
    """
    X = as_array(trials)
    if len(X) == 0:
        raise InvariantError("reference matrix from an empty trial set")
    return reference_from_covariances(covariances(X, shrink), kind, shrink, tol, max_iter)


def incremental_reference(prev: ReferenceMatrix, new_trials) -> ReferenceMatrix:
    """Fold new trials into an EI reference by a count-weighted running mean."""
    if prev.kind not in ("EI", "ER"):
        raise ValueError(f"incremental update needs a Euclidean reference, got {prev.kind}")
    if len(new_trials) == 0:
        return prev
    covs = covariances(new_trials, prev.shrink)
    if covs.shape[1:] != prev.matrix.shape:
        raise InvariantError(f"reference is {prev.matrix.shape}, new trials give {covs.shape[1:]}")
    n, k = prev.n_source_trials, len(covs)
    M = (n * prev.matrix + covs.sum(axis=0)) / (n + k)
    return replace(prev, matrix=0.5 * (M + M.T), n_source_trials=n + k)


def _check_ref(ref: ReferenceMatrix, n_channels: int):
    if ref.matrix.shape != (n_channels, n_channels):
        raise InvariantError(f"reference is {ref.matrix.shape} but trials have {n_channels} channels")


def ea_transform(X, ref: ReferenceMatrix) -> np.ndarray:
    """Array form of :func:`ea_align`: left-multiply each trial by ``R^{-1/2}``."""
    X = np.asarray(X, dtype=np.float64)
    _check_ref(ref, X.shape[-2])
    return ref.invsqrt @ X


def ea_align(trials, ref: ReferenceMatrix):
    """Euclidean alignment of a subject's trials.

    Accepts a list of :class:`Trial` (labels, order and fs are kept) or an
    array of shape (n_trials, n_channels, n_samples).
    """
    if len(trials) and isinstance(trials[0], Trial):
        Y = ea_transform(as_array(trials), ref)
        return [t.with_data(y) for t, y in zip(trials, Y)]
    return ea_transform(as_array(trials), ref)


def ra_align(covs, ref: ReferenceMatrix) -> np.ndarray:
    """Riemannian alignment: congruence of each covariance by ``R^{-1/2}``."""
    covs = np.asarray(covs, dtype=np.float64)
    single = covs.ndim == 2
    if single:
        covs = covs[None]
    _check_ref(ref, covs.shape[-1])
    W = ref.invsqrt
    out = W @ covs @ W
    out = 0.5 * (out + np.swapaxes(out, 1, 2))
    return out[0] if single else out


def aligned_mean_covariance(trials) -> np.ndarray:
    """Arithmetic mean of ``X X^T`` without shrinkage (identity after EA)."""
    X = as_array(trials)
    return np.mean(X @ np.swapaxes(X, 1, 2), axis=0)


__all__ = [
    "REFERENCE_KINDS",
    "ReferenceMatrix",
    "covariance",
    "covariances",
    "default_shrinkage",
    "build_reference",
    "reference_from_covariances",
    "incremental_reference",
    "ea_align",
    "ea_transform",
    "ra_align",
    "aligned_mean_covariance",
]
