import math
import warnings

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from eegalign import spd
from eegalign.exceptions import ConvergenceWarning, IllConditionedError, InvariantError, NotPositiveDefiniteError

from conftest import random_spd, random_spd_stack

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 8)


def test_sym_eig_identity_and_diagonal():
    e = spd.sym_eig(np.eye(3))
    np.testing.assert_array_equal(e.eigenvalues, [1, 1, 1])
    e = spd.sym_eig(np.diag([1.0, 4.0]))
    np.testing.assert_allclose(e.eigenvalues, [4, 1])
    np.testing.assert_allclose(np.abs(e.eigenvectors), [[0, 1], [1, 0]])


@given(seeds, dims)
def test_sym_eig_reconstructs(seed, n):
    M = random_spd(np.random.default_rng(seed), n, 3)
    lam, V = spd.sym_eig(M)
    assert np.all(np.diff(lam) <= 0)
    assert np.linalg.norm(V * lam @ V.T - M) <= 1e-9 * np.linalg.norm(M)


def test_power_closed_forms():
    np.testing.assert_allclose(spd.spd_power(np.eye(3), -0.5), np.eye(3))
    np.testing.assert_allclose(spd.spd_power(np.diag([4.0, 9.0]), 0.5), np.diag([2.0, 3.0]))
    np.testing.assert_allclose(spd.spd_log(np.eye(2)), 0, atol=0)
    np.testing.assert_allclose(spd.spd_log(np.diag([math.e, math.e**2])), np.diag([1.0, 2.0]), atol=1e-15)


def test_power_matches_scipy(rng):
    M = random_spd(rng, 6, 2)
    np.testing.assert_allclose(spd.spd_sqrt(M), scipy.linalg.sqrtm(M).real, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(spd.spd_log(M), scipy.linalg.logm(M).real, rtol=1e-9, atol=1e-12)


def test_validation_errors():
    with pytest.raises(InvariantError):
        spd.as_spd(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(NotPositiveDefiniteError):
        spd.as_spd(np.diag([1.0, -1.0]))
    with pytest.raises(InvariantError):
        spd.as_spd(np.ones((2, 3)))
    with pytest.raises(IllConditionedError):
        spd.spd_invsqrt(np.diag([1.0, 1e-14]))


def test_distance_closed_forms():
    assert spd.riemannian_distance(np.eye(2), np.eye(2)) == 0
    d = spd.riemannian_distance(np.eye(2), np.diag([math.e**2, math.e**-2]))
    assert d == pytest.approx(2 * math.sqrt(2), abs=1e-12)


@given(seeds, dims)
def test_distance_metric_axioms(seed, n):
    rng = np.random.default_rng(seed)
    A, B, C = random_spd_stack(rng, 3, n, 1.5)
    dab, dba = spd.riemannian_distance(A, B), spd.riemannian_distance(B, A)
    assert dab >= 0
    assert dab == pytest.approx(dba, rel=1e-9, abs=1e-12)
    assert spd.riemannian_distance(A, A) < 1e-7
    assert dab <= spd.riemannian_distance(A, C) + spd.riemannian_distance(C, B) + 1e-9


@given(seeds, dims)
def test_distance_invariant_to_inversion(seed, n):
    rng = np.random.default_rng(seed)
    A, B = random_spd_stack(rng, 2, n, 1.5)
    d = spd.riemannian_distance(A, B)
    assert spd.riemannian_distance(np.linalg.inv(A), np.linalg.inv(B)) == pytest.approx(d, rel=1e-8, abs=1e-10)


def test_distances_to_matches_scalar(rng):
    covs = random_spd_stack(rng, 7, 5)
    P = random_spd(rng, 5)
    expected = [spd.riemannian_distance(P, c) for c in covs]
    np.testing.assert_allclose(spd.distances_to(covs, P), expected, rtol=1e-10)


def test_arithmetic_mean_examples(rng):
    P = random_spd(rng, 3)
    np.testing.assert_allclose(spd.arithmetic_mean([P]), P)
    np.testing.assert_allclose(spd.arithmetic_mean([np.eye(2), np.diag([3.0, 1.0])]), np.diag([2.0, 1.0]))


def test_riemannian_mean_examples(rng):
    P = random_spd(rng, 4)
    res = spd.riemannian_mean([P])
    np.testing.assert_array_equal(res.mean, P)
    assert res.converged
    res = spd.riemannian_mean([np.diag([1.0, 4.0]), np.diag([4.0, 1.0])])
    np.testing.assert_allclose(res.mean, np.diag([2.0, 2.0]), rtol=1e-12)


def test_riemannian_mean_matches_midpoint(rng):
    for _ in range(20):
        n = int(rng.integers(2, 10))
        A, B = random_spd_stack(rng, 2, n, 2.0)
        M = spd.riemannian_mean([A, B]).mean
        # independent oracle built from scipy's sqrtm
        Ah = scipy.linalg.sqrtm(A).real
        Aih = np.linalg.inv(Ah)
        oracle = Ah @ scipy.linalg.sqrtm(Aih @ B @ Aih).real @ Ah
        assert np.linalg.norm(M - oracle) <= 1e-7 * np.linalg.norm(oracle)


def test_riemannian_mean_minimizes_dispersion(rng):
    covs = random_spd_stack(rng, 6, 4, 1.0)
    M = spd.riemannian_mean(covs).mean

    def f(X):
        return sum(spd.riemannian_distance(X, c) ** 2 for c in covs)

    for _ in range(10):
        E = rng.standard_normal((4, 4)) * 1e-3
        Mh = spd.spd_sqrt(M)
        assert f(Mh @ spd.sym_exp(E + E.T) @ Mh) >= f(M) - 1e-12


@given(seeds, dims)
def test_riemannian_mean_congruence_equivariant(seed, n):
    rng = np.random.default_rng(seed)
    covs = random_spd_stack(rng, 4, n, 1.0)
    W = rng.standard_normal((n, n)) + n * np.eye(n)
    M = spd.riemannian_mean(covs).mean
    MW = spd.riemannian_mean(W @ covs @ W.T).mean
    expected = W @ M @ W.T
    assert np.linalg.norm(MW - expected) <= 1e-7 * np.linalg.norm(expected)


def test_riemannian_mean_flags_nonconvergence(rng):
    covs = random_spd_stack(rng, 10, 5, 3.0)
    with pytest.warns(ConvergenceWarning):
        res = spd.riemannian_mean(covs, tol=1e-300, max_iter=3)
    assert not res.converged and res.n_iter == 3
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        res = spd.riemannian_mean(covs, tol=1e-300, max_iter=3, warn=False)
    assert not res.converged


def test_riemannian_mean_spread_set_still_converges(rng):
    # log-eigenvalues spanning +-6: a plain unit-step iteration oscillates here
    covs = random_spd_stack(rng, 30, 6, 6.0)
    res = spd.riemannian_mean(covs, tol=1e-7, max_iter=200)
    assert res.converged


def test_riemannian_mean_rejects_bad_input():
    with pytest.raises(InvariantError):
        spd.riemannian_mean([])
    with pytest.raises(NotPositiveDefiniteError):
        spd.riemannian_mean([np.eye(2), np.diag([1.0, -1.0])])
