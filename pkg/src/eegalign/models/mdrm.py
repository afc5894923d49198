"""Minimum distance to Riemannian mean classifier."""
from __future__ import annotations

from dataclasses import dataclass

import warnings

import numpy as np

from .. import spd
from ..exceptions import ConvergenceWarning, EEGAlignError, InvariantError


@dataclass(frozen=True, eq=False)
class MDRMModel:
    classes: tuple
    """Sorted class ids."""
    class_means: np.ndarray
    """Riemannian mean per class, shape (n_classes, R, R)."""
    mean_info: tuple = ()

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.mean_info)

    def mean_of(self, label) -> np.ndarray:
        return self.class_means[self.classes.index(label)]


def mdrm_fit(covs, labels, tol: float = spd.MEAN_TOL, max_iter: int = spd.MEAN_MAX_ITER,
             warn: bool = True) -> MDRMModel:
    """Riemannian mean of the covariances of each class.

    A class mean that stops at ``max_iter`` is kept and flagged in
    ``mean_info``; with ``warn=True`` a :class:`ConvergenceWarning` naming
    the class is emitted as well.
    """
    covs = np.asarray(covs, dtype=np.float64)
    labels = np.asarray(labels)
    if len(covs) != len(labels):
        raise InvariantError(f"{len(covs)} covariances but {len(labels)} labels")
    classes = tuple(int(c) for c in np.unique(labels))
    if len(classes) < 2:
        raise InvariantError(f"MDRM needs at least 2 classes, got {classes}")
    means, info = [], []
    for c in classes:
        try:
            res = spd.riemannian_mean(covs[labels == c], tol=tol, max_iter=max_iter, warn=False)
        except EEGAlignError as exc:
            raise type(exc)(f"class {c}: {exc}") from exc
        if warn and not res.converged:
            warnings.warn(
                f"class {c}: Riemannian mean stopped after {max_iter} iterations (residual {res.residual:.3e})",
                ConvergenceWarning,
                stacklevel=2,
            )
        means.append(res.mean)
        info.append(res)
    return MDRMModel(classes, np.stack(means), tuple(info))


def mdrm_distances(covs, model: MDRMModel) -> np.ndarray:
    """Geodesic distance of each covariance to each class mean, (n, n_classes)."""
    covs = np.asarray(covs, dtype=np.float64)
    if covs.ndim == 2:
        covs = covs[None]
    if covs.shape[1:] != model.class_means.shape[1:]:
        raise InvariantError(f"covariance is {covs.shape[1:]}, model expects {model.class_means.shape[1:]}")
    return np.stack([spd.distances_to(covs, M) for M in model.class_means], axis=1)


def mdrm_predict(cov, model: MDRMModel):
    """Class whose mean is geodesically closest; ties go to the smallest class id.

    Accepts one covariance (returns an int) or a stack (returns an array).
    """
    single = np.ndim(cov) == 2
    d = mdrm_distances(cov, model)
    # argmin returns the first minimum and classes are sorted ascending
    pred = np.asarray(model.classes)[np.argmin(d, axis=1)]
    return int(pred[0]) if single else pred
