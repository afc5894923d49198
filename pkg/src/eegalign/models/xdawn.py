"""xDAWN spatial filtering as a template-energy generalized eigenproblem."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..exceptions import InvariantError, NotPositiveDefiniteError
from ..spd import _fix_signs

DEFAULT_N_COMPONENTS = 4


@dataclass(frozen=True, eq=False)
class XDawnFilters:
    filters: np.ndarray
    """(n_components, n_channels), orthonormal under the total signal covariance."""
    template: np.ndarray
    """Target-class average, (n_channels, n_samples)."""
    eigenvalues: np.ndarray
    target: int


def xdawn_fit(trials, labels, n_components: int = DEFAULT_N_COMPONENTS, target: int = 1) -> XDawnFilters:
    """Filters maximizing evoked-template energy over total signal energy.

    Solves ``(P P^T) v = lam (mean_i X_i X_i^T) v`` where ``P`` is the
    average of the ``target`` trials, and keeps the ``n_components`` largest.
    """
    X = np.asarray(trials, dtype=np.float64)
    labels = np.asarray(labels)
    if not np.any(labels == target):
        raise InvariantError(f"xDAWN needs target-class ({target}) trials")
    n_channels = X.shape[1]
    if not 1 <= n_components <= n_channels:
        raise ValueError(f"n_components must be in [1, {n_channels}], got {n_components}")
    P = X[labels == target].mean(axis=0)
    A = P @ P.T
    B = np.einsum("nct,ndt->cd", X, X) / len(X)
    try:
        lam, V = scipy.linalg.eigh(A, B)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(
            "total signal covariance is singular; regularize the trials (shrinkage)"
        ) from exc
    lam, V = lam[::-1], _fix_signs(V[:, ::-1])
    return XDawnFilters(V[:, :n_components].T.copy(), P, lam[:n_components].copy(), int(target))


def xdawn_apply(trials, filters: XDawnFilters) -> np.ndarray:
    """Project trials onto the filters; output has ``n_components`` channels."""
    X = np.asarray(trials, dtype=np.float64)
    if X.shape[-2] != filters.filters.shape[1]:
        raise InvariantError(f"trial has {X.shape[-2]} channels, filters expect {filters.filters.shape[1]}")
    return filters.filters @ X
