"""Shared builders and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from adaptz.model import Dataset, LinkKind, atoms


def gauss_jordan_inverse(a):
    """Textbook Gauss-Jordan inverse with partial pivoting (test oracle)."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    aug = np.hstack([a, np.eye(n)])
    for c in range(n):
        p = c + int(np.argmax(np.abs(aug[c:, c])))
        aug[[c, p]] = aug[[p, c]]
        aug[c] = aug[c] / aug[c, c]
        for r in range(n):
            if r != c:
                aug[r] = aug[r] - aug[r, c] * aug[c]
    return aug[:, n:]


def random_full_probs(rng, d0, floor=0.02):
    raw = rng.dirichlet(np.ones(d0 + 1))
    full = (1 - floor) * raw + floor / (d0 + 1)
    full[0] = 1.0 - full[1:].sum()
    return full


def make_dataset(rng, n, d0, d1, theta, beta, link=None, split=None, noise=0.0,
                 probs=None):
    """Dataset with random per-row probabilities and arms drawn from them.

    ``noise=0`` gives noiseless responses; for the logistic link responses are
    then the means ``g(eta)``.
    """
    link = link or LinkKind.identity()
    if probs is None:
        probs = np.array([random_full_probs(rng, d0, 0.3) for _ in range(n)])
    arms = np.array([rng.choice(d0 + 1, p=p) for p in probs])
    # make sure every arm shows up in both halves
    split = n // 2 if split is None else split
    for k in range(d0 + 1):
        arms[k] = k
        arms[split + k] = k
    z = rng.normal(size=(n, d1))
    eta = atoms(d0)[arms] @ np.asarray(theta, float) + z @ np.asarray(beta, float)
    y = link.mean(eta) + noise * rng.normal(size=n)
    return Dataset(arms, z, y, probs, split)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, echoed again in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
