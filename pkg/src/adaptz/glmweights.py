"""Per-sample weighting quantities for the GLM score.

For a round with selection probabilities ``p_0..p_d0`` and a working linear
predictor ``eta_j = theta0_j + h`` on atom ``j`` (``theta0_0 = 0``):

* ``m`` is the ``g'``-weighted mean of the covariate,
* ``sigma_glm`` is the noise-variance weighted covariance around ``m``,
* ``omega`` is its symmetric inverse square root.

Conditional expectations over the covariate are exact sums over the
``d0 + 1`` atoms.  Inputs broadcast over a leading sample axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateProbabilityError
from .model import LinkKind, SelectionProbs, as_full_probs, atoms

OMEGA_FLOOR = 1e-12


@dataclass(frozen=True)
class GlmWeights:
    m: NDArray[np.float64]
    omega: NDArray[np.float64]
    sigma_glm: NDArray[np.float64]


def atom_eta(theta0: ArrayLike, h_val: ArrayLike) -> NDArray[np.float64]:
    """Linear predictor on each atom, shape ``(..., d0 + 1)``."""
    theta0 = np.asarray(theta0, dtype=float)
    h = np.asarray(h_val, dtype=float)
    padded = np.concatenate([[0.0], theta0])
    return h[..., None] + padded


def glm_mean_vector(
    probs: SelectionProbs | ArrayLike,
    theta0: ArrayLike,
    h_val: ArrayLike,
    link: LinkKind,
) -> NDArray[np.float64]:
    full = as_full_probs(probs)
    gp = link.derivative(atom_eta(theta0, h_val))
    wts = full * gp
    return wts[..., 1:] / wts.sum(axis=-1, keepdims=True)


def glm_cov(
    probs: SelectionProbs | ArrayLike,
    m: ArrayLike,
    theta0: ArrayLike,
    h_val: ArrayLike,
    link: LinkKind,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Return ``(sigma_glm, omega)``."""
    full = as_full_probs(probs)
    m = np.asarray(m, dtype=float)
    d0 = full.shape[-1] - 1
    eps = link.variance(atom_eta(theta0, h_val))
    dev = atoms(d0) - m[..., None, :]
    wts = full * eps
    sigma = np.einsum("...j,...ja,...jb->...ab", wts, dev, dev)
    vals, vecs = np.linalg.eigh(sigma)
    if not np.all(np.isfinite(vals)) or np.any(vals[..., 0] <= 0):
        raise DegenerateProbabilityError(
            "weighted covariance is not positive definite; some selection "
            "probability or link derivative is effectively zero"
        )
    root = 1.0 / np.sqrt(np.maximum(vals, OMEGA_FLOOR))
    omega = (vecs * root[..., None, :]) @ np.swapaxes(vecs, -1, -2)
    return sigma, omega


def glm_weights(
    probs: SelectionProbs | ArrayLike,
    theta0: ArrayLike,
    h_val: ArrayLike,
    link: LinkKind,
) -> GlmWeights:
    m = glm_mean_vector(probs, theta0, h_val, link)
    sigma, omega = glm_cov(probs, m, theta0, h_val, link)
    return GlmWeights(m, omega, sigma)


def glm_cov_inverse_woodbury(
    probs: SelectionProbs | ArrayLike,
    m: ArrayLike,
    theta0: ArrayLike,
    h_val: float,
    link: LinkKind,
) -> NDArray[np.float64]:
    """Inverse of ``sigma_glm`` from the rank-2 correction of a diagonal.

    Single round only.  Writing ``a_k = p_k eps_k`` and ``mbar_j = g'_j / sum_k
    p_k g'_k``, the inverse is ``diag(1/a) + V M V^T`` with ``V`` having columns
    ``mbar_k / eps_k`` and ``1`` and ``M`` the 2x2 matrix built from the
    reference-arm terms.  Used as an independent check of ``omega``.
    """
    full = as_full_probs(probs)
    if full.ndim != 1:
        raise ValueError("glm_cov_inverse_woodbury works on a single round")
    m = np.asarray(m, dtype=float)
    eps = link.variance(atom_eta(theta0, np.asarray(float(h_val))))
    p0, p = full[0], full[1:]
    # normalised mean: mbar_k = m_k / p_k, and the reference entry follows
    # from sum_j p_j mbar_j = 1
    mbar = np.concatenate([[(1.0 - m.sum()) / p0], m / p])
    if np.any(eps == 0) or np.any(p == 0):
        raise DegenerateProbabilityError("zero pivot in diagonal part")
    a_sum = float(np.sum(p * mbar[1:] ** 2 / eps[1:]))
    denom = a_sum * p0 * eps[0] + (mbar[0] * p0) ** 2
    if denom == 0:
        raise DegenerateProbabilityError("zero pivot in Woodbury correction")
    core = np.array([[-p0 * eps[0], mbar[0] * p0], [mbar[0] * p0, a_sum]]) / denom
    v = np.column_stack([mbar[1:] / eps[1:], np.ones(p.shape[0])])
    return np.diag(1.0 / (p * eps[1:])) + v @ core @ v.T
