"""Common spatial patterns with log-variance features."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..alignment import covariances
from ..exceptions import InvariantError, NotPositiveDefiniteError
from ..spd import _fix_signs

DEFAULT_N_FILTERS = 6


@dataclass(frozen=True, eq=False)
class CSPFilters:
    filters: np.ndarray
    """(n_filters, n_channels); rows have unit norm under the composite covariance."""
    eigenvalues: np.ndarray
    """Generalized eigenvalue of each selected filter."""
    selected: np.ndarray
    """Indices into the descending eigenvalue spectrum."""
    classes: tuple


def csp_fit(trials, labels, n_filters: int = DEFAULT_N_FILTERS, shrink=None) -> CSPFilters:
    """Solve ``S1 v = lam (S1 + S2) v`` on arithmetic class-mean covariances.

    Keeps ``n_filters // 2`` eigenvectors from each end of the spectrum: the
    largest eigenvalues first (descending), then the smallest (ascending).
    """
    X = np.asarray(trials, dtype=np.float64)
    labels = np.asarray(labels)
    classes = tuple(int(c) for c in np.unique(labels))
    if len(classes) != 2:
        raise InvariantError(f"CSP needs exactly 2 classes, got {classes}")
    n_channels = X.shape[1]
    if n_filters < 2 or n_filters % 2 or n_filters > n_channels:
        raise ValueError(f"n_filters must be even and in [2, {n_channels}], got {n_filters}")
    covs = covariances(X, shrink)
    S1 = covs[labels == classes[0]].mean(axis=0)
    S2 = covs[labels == classes[1]].mean(axis=0)
    return csp_from_covariances(S1, S2, n_filters, classes)


def csp_from_covariances(S1, S2, n_filters: int, classes=(0, 1)) -> CSPFilters:
    S1 = np.asarray(S1, dtype=np.float64)
    composite = S1 + np.asarray(S2, dtype=np.float64)
    try:
        lam, V = scipy.linalg.eigh(S1, composite)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(
            "composite covariance is singular; increase covariance shrinkage"
        ) from exc
    lam, V = lam[::-1], _fix_signs(V[:, ::-1])
    half = n_filters // 2
    n = len(lam)
    selected = np.r_[np.arange(half), np.arange(n - 1, n - 1 - half, -1)]
    return CSPFilters(V[:, selected].T.copy(), lam[selected].copy(), selected, tuple(classes))


def csp_features(trials, filters: CSPFilters) -> np.ndarray:
    """``log(mean((w_k^T X)^2))`` per filter; one row per trial.

    A single 2-D trial gives a 1-D feature vector.
    """
    X = np.asarray(trials, dtype=np.float64)
    single = X.ndim == 2
    if single:
        X = X[None]
    if X.shape[1] != filters.filters.shape[1]:
        raise InvariantError(f"trial has {X.shape[1]} channels, filters expect {filters.filters.shape[1]}")
    Z = filters.filters @ X
    power = np.mean(Z**2, axis=2)
    if np.any(power <= 0):
        raise InvariantError("zero-variance spatially filtered signal (degenerate trial)")
    F = np.log(power)
    return F[0] if single else F
