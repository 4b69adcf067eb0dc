import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptz.glmweights import (
    glm_cov,
    glm_cov_inverse_woodbury,
    glm_mean_vector,
    glm_weights,
)
from adaptz.model import LinkKind, SelectionProbs, atoms
from adaptz.probvec import cov_inv_sqrt, cov_inverse_explicit, cov_matrix

from conftest import gauss_jordan_inverse, random_full_probs

LOGIT = LinkKind.logistic()
IDENT = LinkKind.identity()


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def test_identity_mean_is_p():
    sp = SelectionProbs(np.array([0.1, 0.5, 0.2]), 0.2)
    assert np.allclose(glm_mean_vector(sp, [3.0, -1.0, 0.2], 0.7, IDENT), sp.p, atol=1e-16)


def test_logistic_mean_equal_derivatives():
    sp = SelectionProbs(np.array([0.25, 0.25]), 0.5)
    assert np.allclose(glm_mean_vector(sp, [0.0, 0.0], 0.0, LOGIT), [0.25, 0.25], atol=1e-16)


def test_logistic_mean_brute_force():
    sp = SelectionProbs(np.array([0.4, 0.4]), 0.2)
    theta = np.array([2.0, 0.0])
    # ratio definition: E[X g'] / E[g'] by enumerating the three outcomes
    num = np.zeros(2)
    den = 0.0
    for prob, x in zip(sp.full, atoms(2)):
        mu = _sigmoid(x @ theta)
        num += prob * mu * (1 - mu) * x
        den += prob * mu * (1 - mu)
    m = glm_mean_vector(sp, theta, 0.0, LOGIT)
    assert np.allclose(m, num / den, atol=1e-15)
    assert m == pytest.approx([0.21874, 0.52084], abs=1e-5)


def test_identity_cov_reduces_to_probvec():
    sp = SelectionProbs(np.array([0.3, 0.1, 0.35]), 0.25)
    w = glm_weights(sp, [1.0, 2.0, 3.0], -0.5, IDENT)
    assert np.allclose(w.sigma_glm, cov_matrix(sp), atol=1e-10)
    assert np.allclose(w.omega, cov_inv_sqrt(sp), atol=1e-10)


def test_two_atom_hand_computation():
    sp = SelectionProbs(np.array([0.5]), 0.5)
    sigma, omega = glm_cov(sp, [0.5], [0.0], 0.0, LOGIT)
    assert sigma[0, 0] == pytest.approx(0.0625, abs=1e-16)
    assert omega[0, 0] == pytest.approx(4.0, abs=1e-12)


def test_woodbury_identity_and_scalar_cases():
    sp = SelectionProbs(np.array([0.1, 0.6, 0.1]), 0.2)
    m = glm_mean_vector(sp, [0.0, 0.0, 0.0], 0.0, IDENT)
    wb = glm_cov_inverse_woodbury(sp, m, [0.0, 0.0, 0.0], 0.0, IDENT)
    assert np.allclose(wb, cov_inverse_explicit(sp), atol=1e-9)
    sp1 = SelectionProbs(np.array([0.3]), 0.7)
    m1 = glm_mean_vector(sp1, [1.2], 0.4, LOGIT)
    sigma, _ = glm_cov(sp1, m1, [1.2], 0.4, LOGIT)
    wb1 = glm_cov_inverse_woodbury(sp1, m1, [1.2], 0.4, LOGIT)
    assert wb1[0, 0] == pytest.approx(1.0 / sigma[0, 0], rel=1e-12)


instance = st.tuples(st.integers(1, 8), st.integers(0, 2**32 - 1))


def _random_instance(d0, seed):
    rng = np.random.default_rng(seed)
    sp = SelectionProbs.from_full(random_full_probs(rng, d0, 0.05))
    return sp, rng.normal(size=d0), float(rng.normal())


@settings(max_examples=150, deadline=None)
@given(instance)
def test_omega_whitens_sigma(case):
    sp, theta, h = _random_instance(*case)
    w = glm_weights(sp, theta, h, LOGIT)
    assert np.max(np.abs(w.omega @ w.sigma_glm @ w.omega - np.eye(sp.d0))) < 1e-8
    assert np.max(np.abs(w.omega - w.omega.T)) < 1e-12
    assert np.linalg.eigvalsh(w.omega)[0] > 0
    assert np.all((w.m > 0) & (w.m < 1)) and w.m.sum() < 1
    gj = gauss_jordan_inverse(w.sigma_glm)
    assert np.max(np.abs(w.omega @ w.omega - gj)) <= 1e-8 * max(1.0, np.max(np.abs(gj)))


@settings(max_examples=150, deadline=None)
@given(instance)
def test_woodbury_matches_gauss_jordan(case):
    sp, theta, h = _random_instance(*case)
    w = glm_weights(sp, theta, h, LOGIT)
    wb = glm_cov_inverse_woodbury(sp, w.m, theta, h, LOGIT)
    gj = gauss_jordan_inverse(w.sigma_glm)
    assert np.max(np.abs(wb - gj)) <= 1e-8 * max(1.0, np.max(np.abs(gj)))


@settings(max_examples=150, deadline=None)
@given(instance)
def test_weighted_mean_zero_identity(case):
    sp, theta, h = _random_instance(*case)
    w = glm_weights(sp, theta, h, LOGIT)
    eta = np.concatenate([[0.0], theta]) + h
    total = (sp.full * LOGIT.derivative(eta)) @ (atoms(sp.d0) - w.m)
    assert np.max(np.abs(total)) < 1e-12


def test_batched_weights_match_single():
    rng = np.random.default_rng(11)
    full = np.array([random_full_probs(rng, 2) for _ in range(4)])
    h = rng.normal(size=4)
    theta = np.array([0.4, -0.3])
    batch = glm_weights(full, theta, h, LOGIT)
    for i in range(4):
        one = glm_weights(SelectionProbs.from_full(full[i]), theta, h[i], LOGIT)
        assert np.allclose(batch.omega[i], one.omega, atol=1e-14)
        assert np.allclose(batch.m[i], one.m, atol=1e-16)
