"""Numerics on symmetric positive-definite matrices.

Matrix functions go through a symmetric eigendecomposition so results stay
exactly symmetric. The affine-invariant distance is evaluated in the congruent
form ``eig(L^{-1} P2 L^{-T})`` with ``P1 = L L^T``, which has real positive
eigenvalues.
"""
from __future__ import annotations

import warnings
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .exceptions import (
    ConvergenceWarning,
    EigenDecompositionError,
    IllConditionedError,
    InvariantError,
    NotPositiveDefiniteError,
)

SYMMETRY_TOL = 1e-10
CONDITION_FLOOR = 1e-12
MEAN_TOL = 1e-9
MEAN_MAX_ITER = 50


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    """Descending."""
    eigenvectors: np.ndarray
    """Orthonormal columns, first nonzero entry of each column positive."""


class MeanResult(NamedTuple):
    mean: np.ndarray
    n_iter: int
    converged: bool
    residual: float
    """Frobenius norm of the averaged tangent vector at the returned iterate."""
    tol: float
    max_iter: int


def as_spd(M, name: str = "matrix") -> np.ndarray:
    """Validate and symmetrize a matrix.

    Raises :class:`InvariantError` on shape or asymmetry beyond 1e-10 relative
    Frobenius norm and :class:`NotPositiveDefiniteError` when an eigenvalue is
    not strictly positive.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InvariantError(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvariantError(f"{name} has non-finite entries")
    norm = np.linalg.norm(M)
    if np.linalg.norm(M - M.T) > SYMMETRY_TOL * max(norm, np.finfo(float).tiny):
        raise InvariantError(f"{name} is not symmetric")
    S = 0.5 * (M + M.T)
    lam = _eigh(S)[0]
    if lam[0] <= 0:
        raise NotPositiveDefiniteError(f"{name} is not positive definite (min eigenvalue {lam[0]:.3e})")
    return S


def _eigh(M):
    """Ascending eigh with solver failures mapped to our error type."""
    try:
        return np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise EigenDecompositionError(str(exc)) from exc


def _fix_signs(V: np.ndarray) -> np.ndarray:
    # first entry above noise level in each column made positive
    tol = 1e-12 * np.max(np.abs(V), axis=-2, keepdims=True)
    lead = np.argmax(np.abs(V) > tol, axis=-2)
    picked = np.take_along_axis(V, lead[..., None, :], axis=-2)
    return V * np.where(picked < 0, -1.0, 1.0)


def sym_eig(M) -> EigenDecomposition:
    """Eigendecomposition with descending eigenvalues and a fixed sign convention."""
    M = as_spd(M)
    lam, V = _eigh(M)
    return EigenDecomposition(lam[::-1].copy(), _fix_signs(V[:, ::-1].copy()))


def _apply(M, fn, *, inverting: bool) -> np.ndarray:
    """``V diag(fn(lam)) V^T`` for one matrix or a stack of them."""
    lam, V = _eigh(M)
    if np.any(lam <= 0):
        raise NotPositiveDefiniteError(f"matrix is not positive definite (min eigenvalue {lam.min():.3e})")
    if inverting:
        ratio = lam[..., 0] / lam[..., -1]
        if np.any(ratio < CONDITION_FLOOR):
            raise IllConditionedError(
                f"eigenvalue ratio {np.min(ratio):.3e} below conditioning floor {CONDITION_FLOOR:g}"
            )
    return (V * fn(lam)[..., None, :]) @ np.swapaxes(V, -1, -2)


def spd_power(M, alpha: float) -> np.ndarray:
    """Real matrix power ``M^alpha`` of an SPD matrix (or stack of them)."""
    M = np.asarray(M, dtype=np.float64)
    return _apply(0.5 * (M + np.swapaxes(M, -1, -2)), lambda lam: lam**alpha, inverting=alpha < 0)


def spd_sqrt(M) -> np.ndarray:
    return spd_power(M, 0.5)


def spd_invsqrt(M) -> np.ndarray:
    return spd_power(M, -0.5)


def spd_log(M) -> np.ndarray:
    """Principal matrix logarithm; the result is symmetric, not SPD."""
    M = np.asarray(M, dtype=np.float64)
    return _apply(0.5 * (M + np.swapaxes(M, -1, -2)), np.log, inverting=True)


def sym_exp(S) -> np.ndarray:
    """Matrix exponential of a symmetric matrix (always SPD)."""
    S = np.asarray(S, dtype=np.float64)
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    lam, V = _eigh(S)
    return (V * np.exp(lam)[..., None, :]) @ np.swapaxes(V, -1, -2)


def _whitener(P) -> np.ndarray:
    """``L^{-1}`` for the Cholesky factor ``P = L L^T``.

    ``L^{-1} Q L^{-T}`` has the same eigenvalues as ``P^{-1/2} Q P^{-1/2}``
    and is computed without squaring the condition number of ``P``.
    """
    try:
        L = np.linalg.cholesky(P)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("reference matrix is not positive definite") from exc
    return scipy.linalg.solve_triangular(L, np.eye(len(L)), lower=True)


def riemannian_distance(P1, P2) -> float:
    r"""Affine-invariant geodesic distance :math:`\|\log(P_1^{-1}P_2)\|_F`."""
    P1 = as_spd(P1, "P1")
    P2 = as_spd(P2, "P2")
    if P1.shape != P2.shape:
        raise InvariantError(f"dimension mismatch: {P1.shape} vs {P2.shape}")
    W = _whitener(P1)
    lam = np.linalg.eigvalsh(W @ P2 @ W.T)
    return float(np.sqrt(np.sum(np.log(lam) ** 2)))


def distances_to(covs, P) -> np.ndarray:
    """Distances from each matrix of a stack to a single reference, vectorized."""
    covs = np.asarray(covs, dtype=np.float64)
    W = _whitener(np.asarray(P, dtype=np.float64))
    lam = np.linalg.eigvalsh(W @ covs @ W.T)
    return np.sqrt(np.sum(np.log(lam) ** 2, axis=-1))


def _stack_spd(Ps, validate: bool) -> np.ndarray:
    if len(Ps) == 0:
        raise InvariantError("mean of an empty set")
    arr = np.asarray(Ps, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise InvariantError(f"expected a stack of square matrices, got shape {arr.shape}")
    if validate:
        arr = np.stack([as_spd(P, f"matrix {i}") for i, P in enumerate(arr)])
    return arr


def arithmetic_mean(Ps: Sequence) -> np.ndarray:
    """Elementwise average of SPD matrices."""
    arr = _stack_spd(Ps, validate=False)
    M = arr.mean(axis=0)
    return 0.5 * (M + M.T)


def _tangent_mean(arr, M_ihalf):
    """Average log map at ``M`` (whitened coordinates) and the Frechet objective there."""
    lam, V = np.linalg.eigh(M_ihalf @ arr @ M_ihalf)
    if np.any(lam <= 0):
        raise NotPositiveDefiniteError("whitened matrix lost positive definiteness in the mean iteration")
    loglam = np.log(lam)
    T = ((V * loglam[:, None, :]) @ np.swapaxes(V, 1, 2)).mean(axis=0)
    return 0.5 * (T + T.T), float(np.mean(np.sum(loglam**2, axis=1)))


def riemannian_mean(Ps: Sequence, tol: float = MEAN_TOL, max_iter: int = MEAN_MAX_ITER,
                    init=None, warn: bool = True) -> MeanResult:
    """Fréchet mean under the affine-invariant metric.

    Fixed-point iteration
    ``M <- M^{1/2} exp(t mean_i log(M^{-1/2} P_i M^{-1/2})) M^{1/2}``, started
    at the arithmetic mean. The step ``t`` is 1 whenever that lowers the mean
    squared distance or the residual and is halved otherwise, which keeps
    widely spread sets from oscillating. Stops once the Frobenius norm of the
    averaged tangent term drops below ``tol``. Hitting ``max_iter`` first
    returns the iterate with ``converged=False`` and, unless ``warn=False``,
    emits a :class:`ConvergenceWarning`.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    arr = _stack_spd(Ps, validate=True)
    M = arithmetic_mean(arr) if init is None else as_spd(init, "init")
    if len(arr) == 1:
        return MeanResult(arr[0].copy(), 0, True, 0.0, tol, max_iter)

    def state(M):
        lam, V = _eigh(M)
        half = (V * np.sqrt(lam)) @ V.T
        ihalf = (V / np.sqrt(lam)) @ V.T
        T, f = _tangent_mean(arr, ihalf)
        return half, T, f

    M_half, T, f = state(M)
    residual = float(np.linalg.norm(T))
    step = 1.0
    for it in range(max_iter + 1):
        if residual < tol:
            return MeanResult(M, it, True, residual, tol, max_iter)
        if it == max_iter:
            break
        cand = M_half @ sym_exp(step * T) @ M_half
        cand = 0.5 * (cand + cand.T)
        c_half, c_T, c_f = state(cand)
        c_res = float(np.linalg.norm(c_T))
        # near the optimum f moves by ~residual**2, below rounding, so a
        # shrinking residual also counts as progress
        if c_f <= f or c_res < residual or step < 1e-8:
            M, M_half, T, f, residual = cand, c_half, c_T, c_f, c_res
            step = min(1.0, 2 * step)
        else:
            step *= 0.5
    if warn:
        warnings.warn(
            f"Riemannian mean did not reach tol={tol:g} within {max_iter} iterations "
            f"(residual {residual:.3e})",
            ConvergenceWarning,
            stacklevel=2,
        )
    return MeanResult(M, max_iter, False, residual, tol, max_iter)


def geodesic_midpoint(P1, P2) -> np.ndarray:
    """Closed-form geometric mean of two SPD matrices, ``P1 #_{1/2} P2``."""
    A = spd_sqrt(P1)
    Ai = spd_invsqrt(P1)
    M = A @ spd_sqrt(Ai @ P2 @ Ai) @ A
    return 0.5 * (M + M.T)
