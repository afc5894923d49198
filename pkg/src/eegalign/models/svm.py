"""Linear soft-margin SVM with an unregularized bias, plus C selection.

Minimizes ``0.5 ||w||^2 + C sum_i max(0, 1 - y_i (w.x_i + b))`` through its
dual with a primal-dual interior-point method. The stopping rule is the
relative duality gap between the primal value at ``(w(alpha), b*)``, where
``b*`` minimizes the hinge sum for the current ``w``, and the dual value.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.model_selection import StratifiedKFold

from ..exceptions import ConvergenceWarning, InvariantError

C_GRID = tuple(2.0**k for k in range(-3, 6))
GAP_TOL = 1e-6
N_FOLDS = 5


@dataclass(frozen=True, eq=False)
class LinearMarginModel:
    w: np.ndarray
    b: float
    C: float
    classes: tuple
    """(negative, positive) class ids."""
    primal: float
    dual: float
    n_iter: int
    converged: bool

    @property
    def gap(self) -> float:
        return self.primal - self.dual

    def decision_function(self, F) -> np.ndarray:
        return np.asarray(F, dtype=np.float64) @ self.w + self.b


def _hinge_sum(F, y, w, b) -> float:
    return float(np.maximum(0.0, 1.0 - y * (F @ w + b)).sum())


def _best_bias(s, y):
    """Minimize ``sum_i max(0, 1 - y_i (s_i + b))`` over ``b``.

    The objective is convex and piecewise linear with kinks at ``y_i - s_i``.
    Returns ``(value, b)`` with ``b`` the midpoint of the minimizing interval.
    """
    a = np.sort(1.0 - s[y > 0])   # positive terms: max(0, a - b)
    c = np.sort(-1.0 - s[y < 0])  # negative terms: max(0, b - c)
    cand = np.unique(np.concatenate([a, c]))
    a_suffix = np.concatenate([np.cumsum(a[::-1])[::-1], [0.0]])
    c_prefix = np.concatenate([[0.0], np.cumsum(c)])
    ia = np.searchsorted(a, cand, side="right")  # a[ia:] > b
    ic = np.searchsorted(c, cand, side="left")   # c[:ic] < b
    vals = (a_suffix[ia] - (len(a) - ia) * cand) + (ic * cand - c_prefix[ic])
    vmin = vals.min()
    flat = cand[vals <= vmin + 1e-12 * max(1.0, abs(vmin))]
    return float(vmin), float(0.5 * (flat[0] + flat[-1]))


def _encode(labels):
    labels = np.asarray(labels)
    classes = tuple(int(c) for c in np.unique(labels))
    if len(classes) != 2:
        raise InvariantError(f"SVM needs exactly 2 classes, got {classes}")
    return np.where(labels == classes[1], 1.0, -1.0), classes


def _initial_point(y, C):
    """Strictly interior, equality-feasible starting multipliers."""
    n_pos, n_neg = np.sum(y > 0), np.sum(y < 0)
    small = 0.5 * C
    alpha = np.where(y > 0, small * min(1.0, n_neg / n_pos), small * min(1.0, n_pos / n_neg))
    return alpha


def _max_step(x, dx):
    """Largest t in (0, 1] keeping ``x + t dx > 0``."""
    neg = dx < 0
    if not neg.any():
        return 1.0
    return float(min(1.0, np.min(-x[neg] / dx[neg])))


def svm_fit(features, labels, C: float = 1.0, tol: float = GAP_TOL, max_iter: int = 200) -> LinearMarginModel:
    """Train a linear SVM.

    The dual ``min 0.5 a'Qa - 1'a, y'a = 0, 0 <= a <= C`` with
    ``Q = Z Z^T``, ``Z = diag(y) X`` is solved by a Mehrotra predictor-corrector
    interior-point method; each Newton system is reduced to a ``d x d`` solve
    with the Woodbury identity, so a step costs ``O(n d^2)``.

    Parameters
    ----------
    features : ndarray, shape (n, d)
    labels : array-like of two distinct class ids
    C : float
        Hinge-loss weight.
    tol : float
        Stop once ``primal - dual <= tol * max(1, |primal|)``.
    max_iter : int
        Interior-point iteration budget; exhausting it returns the current
        model with ``converged=False`` and a :class:`ConvergenceWarning`.
    """
    F = np.asarray(features, dtype=np.float64)
    y, classes = _encode(labels)
    if not C > 0:
        raise ValueError("C must be positive")
    n, d = F.shape
    Z = y[:, None] * F

    alpha = _initial_point(y, C)
    z = np.ones(n)  # multipliers of alpha >= 0
    v = np.ones(n)  # multipliers of alpha <= C
    nu = 0.0

    def gap_state(alpha):
        w = Z.T @ alpha
        hinge, b = _best_bias(F @ w, y)
        ww = float(w @ w)
        return w, b, 0.5 * ww + C * hinge, float(alpha.sum()) - 0.5 * ww

    def newton(D, r1, r2):
        Dinv = 1.0 / D
        M = np.eye(d) + Z.T @ (Dinv[:, None] * Z)
        cho = np.linalg.cholesky(M)

        def solve(u):
            t = Z.T @ (Dinv * u)
            t = np.linalg.solve(cho.T, np.linalg.solve(cho, t))
            return Dinv * u - Dinv * (Z @ t)

        h1, hy = solve(r1), solve(y)
        dnu = (y @ h1 - r2) / (y @ hy)
        return h1 - dnu * hy, dnu

    converged = False
    it = 0
    w, b, primal, dual = gap_state(alpha)
    while True:
        if primal - dual <= tol * max(1.0, abs(primal)):
            converged = True
            break
        if it >= max_iter:
            break
        s = C - alpha
        rd = Z @ (Z.T @ alpha) - 1.0 + y * nu - z + v
        rp = -float(y @ alpha)
        mu = (alpha @ z + s @ v) / (2 * n)
        # a multiplier pinned at its bound gives D = inf, i.e. Dinv = 0: harmless
        with np.errstate(over="ignore", divide="ignore"):
            D = z / alpha + v / s

        def direction(rc_l, rc_u):
            da, dnu = newton(D, -rd + rc_l / alpha - rc_u / s, rp)
            return da, dnu, (rc_l - z * da) / alpha, (rc_u + v * da) / s

        # predictor
        da, dnu, dz, dv = direction(-alpha * z, -s * v)
        ta = min(_max_step(alpha, da), _max_step(s, -da))
        tz = min(_max_step(z, dz), _max_step(v, dv))
        mu_aff = ((alpha + ta * da) @ (z + tz * dz) + (s - ta * da) @ (v + tz * dv)) / (2 * n)
        sigma = (mu_aff / mu) ** 3
        # corrector
        da, dnu, dz, dv = direction(sigma * mu - alpha * z - da * dz, sigma * mu - s * v + da * dv)
        ta = 0.995 * min(_max_step(alpha, da), _max_step(s, -da))
        tz = 0.995 * min(_max_step(z, dz), _max_step(v, dv))
        alpha = alpha + ta * da
        nu += tz * dnu
        z = z + tz * dz
        v = v + tz * dv
        # Newton steps preserve y'a = 0 only up to rounding; project it back
        alpha = alpha - y * (y @ alpha) / n
        alpha = np.clip(alpha, 1e-300, C * (1 - 1e-16))
        it += 1
        w, b, primal, dual = gap_state(alpha)

    if not converged:
        warnings.warn(
            f"SVM stopped after {it} iterations with duality gap {primal - dual:.3e} (C={C:g})",
            ConvergenceWarning,
            stacklevel=2,
        )
    return LinearMarginModel(w, b, float(C), classes, primal, dual, it, converged)


def svm_predict(features, model: LinearMarginModel):
    F = np.asarray(features, dtype=np.float64)
    scores = model.decision_function(F)
    pred = np.where(scores > 0, model.classes[1], model.classes[0])
    return int(pred) if F.ndim == 1 else pred


def _bca(pred, labels, classes) -> float:
    return float(np.mean([np.mean(pred[labels == c] == c) for c in classes]))


@dataclass(frozen=True)
class CSelection:
    C: float
    scores: dict
    """Mean cross-validated BCA per grid value."""
    n_fits: int


def select_C(features, labels, grid=C_GRID, n_folds: int = N_FOLDS, seed: int = 0,
             tol: float = GAP_TOL, return_details: bool = False):
    """Stratified k-fold choice of C by mean balanced accuracy.

    Ties go to the smaller C. Fold assignment depends only on ``seed``.
    """
    F = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    classes = tuple(int(c) for c in np.unique(labels))
    if len(classes) != 2:
        raise InvariantError(f"C selection needs exactly 2 classes, got {classes}")
    counts = [int(np.sum(labels == c)) for c in classes]
    if min(counts) < n_folds:
        raise InvariantError(f"stratified {n_folds}-fold CV needs >= {n_folds} samples per class, got {counts}")
    folds = list(StratifiedKFold(n_folds, shuffle=True, random_state=seed % 2**32).split(F, labels))
    grid = sorted(float(c) for c in grid)
    scores = {}
    n_fits = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        for C in grid:
            fold_scores = []
            for train, test in folds:
                model = svm_fit(F[train], labels[train], C, tol=tol)
                n_fits += 1
                fold_scores.append(_bca(svm_predict(F[test], model), labels[test], classes))
            scores[C] = float(np.mean(fold_scores))
    best = max(scores.values())
    chosen = min(C for C, s in scores.items() if s == best)
    if return_details:
        return CSelection(chosen, scores, n_fits)
    return chosen
