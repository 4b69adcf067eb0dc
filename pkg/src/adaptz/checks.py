"""Exact finite-sum identities used by ``adaptz check`` and the test suite.

Each check draws random selection-probability vectors and compares two
computations that must agree up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .estimators import gauss_jordan_solve, glm_score, pl_score
from .glmweights import glm_weights
from .model import LinkKind, Sample, SelectionProbs, atoms
from .probvec import cov_inverse_explicit, cov_matrix, cov_sqrt, direction_weight


@dataclass(frozen=True)
class CheckResult:
    name: str
    worst: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.worst <= self.tol

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name}: worst {self.worst:.3e} (tol {self.tol:.0e})"


def random_probs(rng: np.random.Generator, d0: int, min_mass: float = 0.02) -> SelectionProbs:
    """Dirichlet(1) draw mixed with the uniform law so every entry is at least
    ``min_mass / (d0 + 1)``."""
    raw = rng.dirichlet(np.ones(d0 + 1))
    full = (1.0 - min_mass) * raw + min_mass / (d0 + 1)
    full[0] = 1.0 - full[1:].sum()
    return SelectionProbs.from_full(full)


def _inverse_vs_gauss_jordan(sp: SelectionProbs, rng) -> float:
    cov = cov_matrix(sp)
    gj = gauss_jordan_solve(cov, np.eye(sp.d0))
    exp = cov_inverse_explicit(sp)
    return float(np.max(np.abs(gj - exp)) / np.max(np.abs(exp)))


def _sqrt_squared(sp: SelectionProbs, rng) -> float:
    root = cov_sqrt(sp)
    return float(np.max(np.abs(root @ root - cov_matrix(sp))))


def _pl_score_mean(sp: SelectionProbs, rng) -> float:
    d0 = sp.d0
    theta = rng.normal(size=d0)
    h = float(rng.normal())
    full = sp.full
    total = np.zeros(d0)
    for j, x in enumerate(atoms(d0)):
        # two-point noise around the mean, shifted by a nuisance error the
        # score must be orthogonal to
        for eps in (-1.3, 1.3):
            y = float(x @ theta) + h + 0.7 + eps
            total += 0.5 * full[j] * pl_score(Sample(j, np.zeros(0), y, sp), theta, h)
    return float(np.max(np.abs(total)))


def _glm_score_mean(sp: SelectionProbs, rng) -> float:
    d0 = sp.d0
    link = LinkKind.logistic()
    theta = rng.normal(size=d0)
    h = float(rng.normal())
    w = glm_weights(sp, theta, h, link)
    full = sp.full
    total = np.zeros(d0)
    for j, x in enumerate(atoms(d0)):
        mu = float(link.mean(np.array(float(x @ theta) + h)))
        # expectation over the Bernoulli response
        for y, prob in ((1.0, mu), (0.0, 1.0 - mu)):
            total += prob * full[j] * glm_score(Sample(j, np.zeros(0), y, sp), w, theta, h, link)
    return float(np.max(np.abs(total)))


def _neyman_glm(sp: SelectionProbs, rng) -> float:
    d0 = sp.d0
    link = LinkKind.logistic()
    theta = rng.normal(size=d0)
    h = float(rng.normal())
    w = glm_weights(sp, theta, h, link)
    eta = np.concatenate([[0.0], theta]) + h
    terms = sp.full[:, None] * link.derivative(eta)[:, None] * (atoms(d0) - w.m)
    return float(np.max(np.abs(terms.sum(axis=0))))


def _direction_unit_variance(sp: SelectionProbs, rng) -> float:
    u = rng.normal(size=sp.d0)
    u /= np.linalg.norm(u)
    w, _ = direction_weight(sp, u)
    proj = (atoms(sp.d0) - sp.p) @ w
    return abs(float(sp.full @ proj**2) - 1.0)


def _eigen_lower_bound(sp: SelectionProbs, rng) -> float:
    """Positive part of ``min_j p_j / (d0 + 2) - lambda_min``; zero when the
    bound holds."""
    lam = float(np.linalg.eigvalsh(cov_matrix(sp))[0])
    return max(0.0, float(sp.full.min()) / (sp.d0 + 2) - lam)


CHECKS: tuple[tuple[str, Callable, float], ...] = (
    ("explicit inverse equals Gauss-Jordan inverse", _inverse_vs_gauss_jordan, 1e-10),
    ("square root squares back to the covariance", _sqrt_squared, 1e-10),
    ("partial-linear score has zero conditional mean", _pl_score_mean, 1e-12),
    ("GLM score has zero conditional mean", _glm_score_mean, 1e-12),
    ("GLM Neyman identity", _neyman_glm, 1e-12),
    ("direction weight has unit variance", _direction_unit_variance, 1e-12),
    ("covariance eigenvalue lower bound", _eigen_lower_bound, 0.0),
)


def run_identity_checks(instances: int = 1000, seed: int = 0, max_d0: int = 10) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst = {name: 0.0 for name, _, _ in CHECKS}
    for _ in range(instances):
        sp = random_probs(rng, int(rng.integers(1, max_d0 + 1)))
        for name, fn, _ in CHECKS:
            worst[name] = max(worst[name], fn(sp, rng))
    return [CheckResult(name, worst[name], tol) for name, _, tol in CHECKS]
