"""Z-score, principal-component projection, and train-range [0, 1] scaling."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..exceptions import InvariantError
from ..spd import _fix_signs

DEFAULT_N_FEATURES = 20


@dataclass(frozen=True, eq=False)
class PCAModel:
    mean: np.ndarray
    std: np.ndarray
    kept: np.ndarray
    """Indices of input dimensions with nonzero training variance."""
    components: np.ndarray
    """(k, d_kept), orthonormal rows."""
    feature_min: np.ndarray
    feature_range: np.ndarray
    explained_variance: np.ndarray

    @property
    def dropped(self) -> np.ndarray:
        mask = np.ones(len(self.mean), dtype=bool)
        mask[self.kept] = False
        return np.flatnonzero(mask)


def _flatten(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return X.reshape(len(X), -1) if X.ndim > 2 else X


def pca_fit(features, k: int = DEFAULT_N_FEATURES) -> PCAModel:
    """Fit on training vectors (trials are flattened row-major first).

    Dimensions with zero training variance are dropped with a warning.
    """
    F = _flatten(features)
    n, d = F.shape
    mean = F.mean(axis=0)
    std = F.std(axis=0)
    kept = np.flatnonzero(std > 0)
    if len(kept) < d:
        warnings.warn(f"dropping {d - len(kept)} zero-variance dimension(s) before PCA", stacklevel=2)
    if k > min(n, len(kept)):
        raise InvariantError(f"PCA to {k} features needs at least {k} samples and {k} varying dimensions "
                             f"(have {n} samples, {len(kept)} dimensions)")
    Z = (F[:, kept] - mean[kept]) / std[kept]
    # right singular vectors of the centred data = covariance eigenvectors
    _, s, Vt = np.linalg.svd(Z, full_matrices=False)
    comps = _fix_signs(Vt[:k].T).T
    proj = Z @ comps.T
    fmin = proj.min(axis=0)
    frange = proj.max(axis=0) - fmin
    frange[frange == 0] = 1.0
    return PCAModel(mean, std, kept, comps, fmin, frange, s[:k] ** 2 / max(n - 1, 1))


def pca_apply(features, model: PCAModel) -> np.ndarray:
    """Project with training statistics; test values may fall outside [0, 1]."""
    F = np.asarray(features, dtype=np.float64)
    single = F.ndim == 1
    F = F[None] if single else _flatten(F)
    Z = (F[:, model.kept] - model.mean[model.kept]) / model.std[model.kept]
    out = (Z @ model.components.T - model.feature_min) / model.feature_range
    return out[0] if single else out
