"""Multinomial covariance algebra for one-hot covariates.

Every function accepts either a :class:`SelectionProbs` or a full probability
array of shape ``(..., d0 + 1)`` (reference arm first) and broadcasts over the
leading axes, so a whole fold can be processed in one call.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import UsageError
from .model import SelectionProbs, as_full_probs

EIG_FLOOR = 1e-14


def cov_matrix(probs: SelectionProbs | ArrayLike) -> NDArray[np.float64]:
    """``diag(p) - p p^T`` for the arm probabilities ``p``."""
    p = as_full_probs(probs)[..., 1:]
    out = -p[..., :, None] * p[..., None, :]
    idx = np.arange(p.shape[-1])
    out[..., idx, idx] += p
    return out


def cov_inverse_explicit(probs: SelectionProbs | ArrayLike) -> NDArray[np.float64]:
    """Closed-form inverse: ``diag(1/p) + (1/p0) 1 1^T``."""
    full = as_full_probs(probs)
    p0, p = full[..., 0], full[..., 1:]
    d0 = p.shape[-1]
    out = np.broadcast_to((1.0 / p0)[..., None, None], p.shape[:-1] + (d0, d0)).copy()
    idx = np.arange(d0)
    out[..., idx, idx] += 1.0 / p
    return out


def sym_sqrt(mat: ArrayLike, floor: float = EIG_FLOOR) -> NDArray[np.float64]:
    """Symmetric PSD square root by eigendecomposition (batched)."""
    vals, vecs = np.linalg.eigh(np.asarray(mat, dtype=float))
    root = np.sqrt(np.maximum(vals, floor))
    return (vecs * root[..., None, :]) @ np.swapaxes(vecs, -1, -2)


def sym_inv_sqrt(mat: ArrayLike, floor: float = EIG_FLOOR) -> NDArray[np.float64]:
    vals, vecs = np.linalg.eigh(np.asarray(mat, dtype=float))
    root = 1.0 / np.sqrt(np.maximum(vals, floor))
    return (vecs * root[..., None, :]) @ np.swapaxes(vecs, -1, -2)


def cov_sqrt(probs: SelectionProbs | ArrayLike) -> NDArray[np.float64]:
    return sym_sqrt(cov_matrix(probs))


def cov_inv_sqrt(probs: SelectionProbs | ArrayLike) -> NDArray[np.float64]:
    """``Sigma^{-1/2}``, the symmetric root of the explicit inverse."""
    return sym_sqrt(cov_inverse_explicit(probs))


def direction_weight(
    probs: SelectionProbs | ArrayLike, u: ArrayLike
) -> tuple[NDArray[np.float64], NDArray[np.float64] | float]:
    """Variance-stabilising weight for the direction ``u``.

    Returns ``w = Sigma^{-1} u / sqrt(u^T Sigma^{-1} u)`` and the scale
    ``1 / sqrt(u^T Sigma^{-1} u)``.  With a single probability vector the scale
    is a float; batched input gives an array.
    """
    u = _unit(u)
    inv = cov_inverse_explicit(probs)
    siu = inv @ u
    quad = siu @ u
    scale = 1.0 / np.sqrt(quad)
    w = siu * scale[..., None]
    if np.ndim(scale) == 0:
        return w, float(scale)
    return w, scale


def _unit(u: ArrayLike) -> NDArray[np.float64]:
    u = np.asarray(u, dtype=float).reshape(-1)
    norm = np.linalg.norm(u)
    if abs(norm - 1.0) > 1e-10:
        raise UsageError(f"direction must have unit norm (got {norm!r})")
    return u
