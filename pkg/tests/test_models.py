import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st
from sklearn.discriminant_analysis import LinearDiscriminantAnalysis
from sklearn.svm import SVC

from eegalign import covariances, spd
from eegalign.exceptions import ConvergenceWarning, InvariantError
from eegalign.models import (
    csp_features, csp_fit, lda_fit, lda_predict, mdrm_fit, mdrm_predict, pca_apply, pca_fit, select_C, svm_fit,
    svm_predict, xdawn_apply, xdawn_fit,
)
from eegalign.models.csp import csp_from_covariances
from eegalign.models.mdrm import MDRMModel
from eegalign.models.svm import C_GRID

from conftest import random_spd, random_spd_stack

seeds = st.integers(0, 2**32 - 1)


# ---------------------------------------------------------------- MDRM

def test_mdrm_single_member_classes(rng):
    A, B = random_spd_stack(rng, 2, 3)
    model = mdrm_fit([A, B], [0, 1])
    np.testing.assert_allclose(model.mean_of(0), A)
    np.testing.assert_allclose(model.mean_of(1), B)
    dup = mdrm_fit([A, A, B, B], [0, 0, 1, 1])
    np.testing.assert_allclose(dup.class_means, model.class_means, rtol=1e-12)
    assert mdrm_predict(A, model) == 0 and mdrm_predict(B, model) == 1


def test_mdrm_means_match_direct_call(rng):
    covs = random_spd_stack(rng, 20, 4)
    labels = rng.integers(0, 2, 20)
    model = mdrm_fit(covs, labels)
    for c in (0, 1):
        np.testing.assert_array_equal(model.mean_of(c), spd.riemannian_mean(covs[labels == c]).mean)
    assert model.converged


def test_mdrm_tie_goes_to_smallest_class():
    model = MDRMModel((2, 5), np.stack([np.diag([2.0, 1.0]), np.diag([1.0, 2.0])]))
    # identity sits at the same geodesic distance from both means
    assert mdrm_predict(np.eye(2), model) == 2


def test_mdrm_needs_two_classes(rng):
    with pytest.raises(InvariantError):
        mdrm_fit(random_spd_stack(rng, 3, 2), [1, 1, 1])


def test_mdrm_warns_on_capped_mean(rng):
    covs = random_spd_stack(rng, 10, 4, 3.0)
    with pytest.warns(ConvergenceWarning, match="class"):
        model = mdrm_fit(covs, [0, 1] * 5, max_iter=1)
    assert not model.converged


@given(seeds, st.integers(2, 6), st.integers(2, 4))
def test_mdrm_is_brute_force_argmin(seed, n, k):
    rng = np.random.default_rng(seed)
    model = MDRMModel(tuple(range(k)), random_spd_stack(rng, k, n, 1.5))
    cov = random_spd(rng, n, 1.5)
    d = [spd.riemannian_distance(M, cov) for M in model.class_means]
    assert mdrm_predict(cov, model) == int(np.argmin(d))


@given(seeds)
def test_mdrm_congruence_invariant(seed):
    rng = np.random.default_rng(seed)
    covs = random_spd_stack(rng, 24, 4)
    labels = np.repeat([0, 1], 12)
    covs[labels == 1] *= 1.5
    test = random_spd_stack(rng, 10, 4)
    W = rng.standard_normal((4, 4)) + 3 * np.eye(4)
    p = mdrm_predict(test, mdrm_fit(covs, labels))
    q = mdrm_predict(W @ test @ W.T, mdrm_fit(W @ covs @ W.T, labels))
    np.testing.assert_array_equal(p, q)


# ---------------------------------------------------------------- CSP

def test_csp_diagonal_case():
    f = csp_from_covariances(np.diag([4.0, 1.0]), np.diag([1.0, 4.0]), 2)
    np.testing.assert_allclose(f.eigenvalues, [0.8, 0.2], rtol=1e-12)
    W = f.filters / np.linalg.norm(f.filters, axis=1, keepdims=True)
    np.testing.assert_allclose(np.abs(W), np.eye(2), atol=1e-12)


def test_csp_equal_classes_give_half(rng):
    S = random_spd(rng, 5)
    f = csp_from_covariances(S, S, 4)
    np.testing.assert_allclose(f.eigenvalues, 0.5, rtol=1e-10)


def _mi_trials(rng, n=40, c=6, t=60):
    labels = np.repeat([0, 1], n // 2)
    scale = np.ones((n, c, 1))
    scale[labels == 0, 0] = 2.0
    scale[labels == 1, 1] = 2.0
    A = random_spd(rng, c)
    return A @ (scale * rng.standard_normal((n, c, t))), labels


def test_csp_filters_normalized_and_match_scipy(rng):
    X, y = _mi_trials(rng)
    f = csp_fit(X, y, 4)
    C = covariances(X)
    S1, S2 = C[y == 0].mean(0), C[y == 1].mean(0)
    comp = S1 + S2
    np.testing.assert_allclose(np.einsum("kc,cd,kd->k", f.filters, comp, f.filters), 1.0, rtol=1e-10)
    lam = scipy.linalg.eigvalsh(S1, comp)
    np.testing.assert_allclose(f.eigenvalues, np.r_[lam[::-1][:2], lam[:2]], rtol=1e-10)
    assert np.all(np.diff(f.eigenvalues[:2]) <= 0) and np.all(np.diff(f.eigenvalues[2:]) >= 0)


def test_csp_scale_invariance(rng):
    X, y = _mi_trials(rng)
    a, b = csp_fit(X, y, 4), csp_fit(7.0 * X, y, 4)
    na = a.filters / np.linalg.norm(a.filters, axis=1, keepdims=True)
    nb = b.filters / np.linalg.norm(b.filters, axis=1, keepdims=True)
    np.testing.assert_allclose(na, nb, atol=1e-10)


def test_csp_features(rng):
    X, y = _mi_trials(rng)
    f = csp_fit(X, y, 4)
    F = csp_features(X, f)
    np.testing.assert_allclose(csp_features(3.0 * X, f), F + 2 * np.log(3.0), rtol=1e-12)
    np.testing.assert_allclose(csp_features(X[0], f), F[0])
    # a trial whose filtered rows are white with unit variance
    Z = rng.standard_normal((4, 20000))
    trial = np.linalg.pinv(f.filters) @ Z
    assert np.max(np.abs(csp_features(trial, f))) < 0.05


def test_csp_argument_checks(rng):
    X, y = _mi_trials(rng)
    with pytest.raises(ValueError):
        csp_fit(X, y, 3)
    with pytest.raises(InvariantError):
        csp_fit(X, np.zeros(len(y)), 2)


# ---------------------------------------------------------------- LDA

def test_lda_separable_clouds(rng):
    mu = np.array([2.0, -1.0, 0.5])
    F = np.vstack([mu + 0.1 * rng.standard_normal((30, 3)), -mu + 0.1 * rng.standard_normal((30, 3))])
    y = np.repeat([1, 0], 30)
    m = lda_fit(F, y)
    cos = m.w @ mu / np.linalg.norm(m.w) / np.linalg.norm(mu)
    assert cos > 0.95
    np.testing.assert_array_equal(lda_predict(F, m), y)


def test_lda_matches_direct_solve_and_sklearn(rng):
    F = rng.standard_normal((80, 4))
    y = (F[:, 0] + 0.5 * rng.standard_normal(80) > 0).astype(int)
    m = lda_fit(F, y)
    mu0, mu1 = F[y == 0].mean(0), F[y == 1].mean(0)
    Sw = (F[y == 0] - mu0).T @ (F[y == 0] - mu0) + (F[y == 1] - mu1).T @ (F[y == 1] - mu1)
    w = np.linalg.solve(Sw + 1e-6 * np.trace(Sw) / 4 * np.eye(4), mu1 - mu0)
    np.testing.assert_allclose(m.w, w, rtol=1e-12)
    sk = LinearDiscriminantAnalysis(priors=[0.5, 0.5]).fit(F, y)
    np.testing.assert_array_equal(lda_predict(F, m), sk.predict(F))


@given(seeds)
def test_lda_affine_invariance(seed):
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((60, 3))
    y = (F @ [1.0, -1.0, 0.3] > 0).astype(int)
    test = rng.standard_normal((40, 3))
    A = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    t = rng.standard_normal(3) * 5
    p = lda_predict(test, lda_fit(F, y))
    m2 = lda_fit(F @ A.T + t, y)
    scores = m2.decision_function(test @ A.T + t)
    q = lda_predict(test @ A.T + t, m2)
    # labels agree except possibly within rounding of the decision boundary
    differ = p != q
    assert np.all(np.abs(scores[differ]) < 1e-6 * np.abs(scores).max())


def test_lda_needs_two_per_class():
    with pytest.raises(InvariantError):
        lda_fit(np.ones((3, 2)), [0, 0, 1])


# ---------------------------------------------------------------- xDAWN

def test_xdawn_recovers_template_subspace(rng):
    c, t, n = 6, 80, 300
    wave = np.sin(np.linspace(0, 3 * np.pi, t))
    direction = np.zeros(c)
    direction[[1, 4]] = [0.6, 0.8]
    y = (rng.random(n) < 0.3).astype(int)
    X = rng.standard_normal((n, c, t))
    X[y == 1] += 3 * np.outer(direction, wave)
    f = xdawn_fit(X, y, 2)
    # top filter maximises template energy: orthogonal to noise-only directions
    B = np.einsum("nct,ndt->cd", X, X) / n
    pattern = B @ f.filters[0]
    pattern /= np.linalg.norm(pattern)
    assert abs(pattern @ direction) > 1 - 1e-2
    G = f.filters @ B @ f.filters.T
    np.testing.assert_allclose(G, np.eye(2), atol=1e-10)


def test_xdawn_exact_subspace_under_isotropic_noise():
    c, t = 5, 40
    direction = np.array([1.0, 2.0, 0.0, 0.0, 0.0]) / np.sqrt(5)
    P = np.outer(direction, np.cos(np.linspace(0, 2 * np.pi, t)))
    # one noise trial per channel: their summed covariance is a multiple of I
    E = np.stack([np.outer(np.eye(c)[j], np.eye(t)[j]) for j in range(c)])
    # targets in +/- pairs so the template is exactly P and cross terms cancel
    X = np.concatenate([P + E, P - E, E])
    y = np.r_[np.ones(2 * c, int), np.zeros(c, int)]
    B = np.einsum("nct,ndt->cd", X, X) / len(X)
    np.testing.assert_allclose(B, (2 * c * P @ P.T + 3 * np.eye(c)) / len(X), atol=1e-14)
    f = xdawn_fit(X, y, 1)
    v = f.filters[0] / np.linalg.norm(f.filters[0])
    assert np.arccos(min(1.0, abs(v @ direction))) < 1e-6


def test_xdawn_full_rank_is_invertible(rng):
    X = rng.standard_normal((30, 4, 20))
    y = np.r_[np.ones(10, int), np.zeros(20, int)]
    f = xdawn_fit(X, y, 4)
    assert abs(np.linalg.det(f.filters)) > 1e-8
    Z = xdawn_apply(X, f)
    np.testing.assert_allclose(np.linalg.solve(f.filters, Z.transpose(1, 0, 2).reshape(4, -1)),
                               X.transpose(1, 0, 2).reshape(4, -1), atol=1e-10)


def test_xdawn_needs_targets(rng):
    with pytest.raises(InvariantError):
        xdawn_fit(rng.standard_normal((5, 3, 10)), np.zeros(5, int))


# ---------------------------------------------------------------- PCA

def test_pca_matches_covariance_eigendecomposition(rng):
    F = rng.standard_normal((100, 8)) @ rng.standard_normal((8, 8))
    m = pca_fit(F, 3)
    Z = (F - F.mean(0)) / F.std(0)
    lam, V = np.linalg.eigh(np.cov(Z.T))
    V = V[:, ::-1][:, :3]
    np.testing.assert_allclose(np.abs(m.components @ V), np.eye(3), atol=1e-8)
    np.testing.assert_allclose(m.explained_variance, lam[::-1][:3], rtol=1e-10)
    np.testing.assert_allclose(m.components @ m.components.T, np.eye(3), atol=1e-12)


def test_pca_training_features_in_unit_range(rng):
    F = rng.standard_normal((50, 30))
    m = pca_fit(F, 20)
    out = pca_apply(F, m)
    assert out.shape == (50, 20)
    assert out.min() >= 0 and out.max() <= 1
    np.testing.assert_allclose(out.min(0), 0, atol=1e-12)
    np.testing.assert_allclose(out.max(0), 1, atol=1e-12)
    # test vectors are scaled with training statistics and may leave [0, 1]
    far = pca_apply(10 * F[:5], m)
    assert far.min() < 0 or far.max() > 1


def test_pca_of_orthonormal_data_is_a_rotation(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    F = rng.standard_normal((40, 4))
    F = (F - F.mean(0)) / F.std(0)
    m = pca_fit(F @ Q.T, 4)
    R = m.components
    np.testing.assert_allclose(R @ R.T, np.eye(4), atol=1e-12)
    Zs = (F @ Q.T - m.mean) / m.std
    np.testing.assert_allclose(Zs @ R.T @ R, Zs, atol=1e-10)


def test_pca_drops_constant_dimension(rng):
    F = rng.standard_normal((30, 5))
    F[:, 2] = 1.0
    with pytest.warns(UserWarning, match="zero-variance"):
        m = pca_fit(F, 3)
    assert m.dropped.tolist() == [2]


def test_pca_needs_enough_samples(rng):
    with pytest.raises(InvariantError):
        pca_fit(rng.standard_normal((10, 30)), 20)


# ---------------------------------------------------------------- SVM

def test_svm_symmetric_pair():
    m = svm_fit(np.array([[1.0, 0.0], [-1.0, 0.0]]), [1, 0], C=1e3, tol=1e-12)
    np.testing.assert_allclose(m.w, [1.0, 0.0], atol=1e-8)
    assert abs(m.b) < 1e-8
    assert svm_predict(np.array([0.5, 3.0]), m) == 1


def test_svm_matches_sklearn(rng):
    F = rng.standard_normal((120, 5))
    y = (F @ [1.0, -2.0, 0.5, 0.0, 1.0] + rng.standard_normal(120) > 0).astype(int)
    for C in (0.125, 1.0, 8.0):
        m = svm_fit(F, y, C, tol=1e-10)
        sk = SVC(kernel="linear", C=C, tol=1e-10).fit(F, y)
        np.testing.assert_allclose(m.w, sk.coef_[0], atol=2e-3 * max(1.0, np.abs(m.w).max()))
        obj = 0.5 * m.w @ m.w + C * np.maximum(0, 1 - (2 * y - 1) * (F @ m.w + m.b)).sum()
        w = sk.coef_[0]
        sk_obj = 0.5 * w @ w + C * np.maximum(0, 1 - (2 * y - 1) * (F @ w + sk.intercept_[0])).sum()
        assert obj <= sk_obj + 1e-6 * abs(sk_obj)


def test_svm_duplicates_equal_doubled_C(rng):
    F = rng.standard_normal((60, 4))
    y = (F[:, 0] + 0.8 * rng.standard_normal(60) > 0).astype(int)
    a = svm_fit(np.vstack([F, F]), np.r_[y, y], 0.5, tol=1e-12)
    b = svm_fit(F, y, 1.0, tol=1e-12)
    np.testing.assert_allclose(a.decision_function(F), b.decision_function(F), atol=1e-6)


def test_svm_separable_large_C_has_zero_hinge(rng):
    F = rng.standard_normal((80, 3))
    y = (F @ [1.0, 1.0, -1.0] > 0).astype(int)
    F = F + 0.3 * (2 * y - 1)[:, None] * np.array([1.0, 1.0, -1.0]) / np.sqrt(3)
    m = svm_fit(F, y, 1e4, tol=1e-10)
    margins = (2 * y - 1) * m.decision_function(F)
    assert margins.min() >= 1 - 1e-6
    assert m.converged and m.gap >= -1e-9


def test_svm_reports_nonconvergence(rng):
    F = rng.standard_normal((50, 3))
    y = rng.integers(0, 2, 50)
    with pytest.warns(ConvergenceWarning):
        m = svm_fit(F, y, 1.0, tol=1e-14, max_iter=2)
    assert not m.converged and m.n_iter == 2


def test_select_C_counts_and_determinism(rng):
    F = rng.standard_normal((60, 3))
    y = (F[:, 0] + 0.5 * rng.standard_normal(60) > 0).astype(int)
    d = select_C(F, y, seed=7, return_details=True)
    assert d.n_fits == 45 and len(d.scores) == 9
    assert d.C in C_GRID
    assert select_C(F, y, seed=7) == d.C
    assert d.scores[d.C] == max(d.scores.values())
    assert all(s < d.scores[d.C] for C, s in d.scores.items() if C < d.C)


def test_select_C_tie_returns_smallest():
    # perfectly separated with a wide gap: every C scores 1.0
    F = np.r_[np.full((10, 1), -5.0), np.full((10, 1), 5.0)] + np.linspace(0, 0.1, 20)[:, None]
    y = np.repeat([0, 1], 10)
    assert select_C(F, y) == 2.0**-3


def test_select_C_needs_enough_per_class(rng):
    with pytest.raises(InvariantError):
        select_C(rng.standard_normal((12, 2)), np.r_[np.zeros(9, int), np.ones(3, int)])
