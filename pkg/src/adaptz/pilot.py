"""Fold-1 pilot estimators over the stacked design ``Q = [X, Z]``.

All fits return a :class:`PilotFit` whose ``theta_hat`` covers the ``d0``
covariate columns and ``beta_hat`` the ``d1`` nuisance columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numba
import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ConfigurationError, UsageError
from .model import Fold, LinkKind

PilotMethod = Literal["ols", "lasso", "mle", "glm-lasso"]

LASSO_TOL = 1e-10
LASSO_MAX_SWEEPS = 10_000
MLE_GRAD_TOL = 1e-8
MLE_MAX_ITER = 100
SEPARATION_NORM = 1e4
PROX_TOL = 1e-8
PROX_MAX_ITER = 20_000


@dataclass(frozen=True)
class PilotFit:
    theta_hat: NDArray[np.float64]
    beta_hat: NDArray[np.float64]
    method: str
    iterations: int = 0
    converged: bool = True
    notes: dict = field(default_factory=dict, compare=False)

    @property
    def coef(self) -> NDArray[np.float64]:
        return np.concatenate([self.theta_hat, self.beta_hat])

    def h(self, z: ArrayLike) -> NDArray[np.float64]:
        """Fitted nuisance ``z^T beta_hat`` for each row of ``z``."""
        return np.asarray(z, dtype=float) @ self.beta_hat

    def with_theta(self, theta: ArrayLike) -> "PilotFit":
        return PilotFit(
            np.asarray(theta, dtype=float), self.beta_hat, self.method,
            self.iterations, self.converged, dict(self.notes),
        )


def _split(coef: NDArray[np.float64], d0: int, method: str, **kw) -> PilotFit:
    return PilotFit(coef[:d0].copy(), coef[d0:].copy(), method, **kw)


def _check_fold(fold: Fold) -> None:
    if fold.n == 0:
        raise UsageError("pilot fold is empty")


# --- least squares ----------------------------------------------------------


def ols_fit(fold: Fold) -> PilotFit:
    """Minimum-norm least squares; rank deficiency is noted, not an error."""
    _check_fold(fold)
    q = fold.design()
    coef, _, rank, _ = np.linalg.lstsq(q, fold.y, rcond=None)
    notes = {"rank": int(rank)}
    if rank < q.shape[1]:
        notes["singular"] = True
    return _split(coef, fold.d0, "ols", iterations=1, converged=True, notes=notes)


# --- lasso ---------------------------------------------------------------


def lasso_lambda(
    n1: int,
    nu: float = 1.0,
    B: float = 1.0,
    d0: int = 1,
    d1: int = 1,
    t: float = 0.0,
    s_guess: int = 1,
    glm: bool = False,
) -> float:
    """Theory-driven Lasso penalty.

    ``lambda = 2 nu (B + 1) sqrt(2 [log(2/delta) + log(d0 + d1)] / n1)`` with
    ``delta = min{(s + d0) n1^(2t - 1/2), 1/(d0 + d1)}``.  With ``glm=True``
    the prefactor is ``2 nu B`` (``B`` then bounds the full regressor norm)
    and the exponent is ``2t - 1/4``.
    """
    if n1 < 1:
        raise ConfigurationError("n1 must be positive")
    if not 0.0 <= t < 0.25:
        raise ConfigurationError("t must lie in [0, 1/4)")
    p = d0 + d1
    expo = 2 * t - (0.25 if glm else 0.5)
    delta = min((s_guess + d0) * n1**expo, 1.0 / p)
    if not delta > 0:
        raise ConfigurationError(f"non-positive delta {delta!r}")
    factor = B if glm else B + 1.0
    return 2.0 * nu * factor * math.sqrt(2.0 * (math.log(2.0 / delta) + math.log(p)) / n1)


def universal_lambda(n1: int, p: int, noise_sd: float = 1.0) -> float:
    """The common ``sigma sqrt(2 log p / n)`` penalty."""
    return noise_sd * math.sqrt(2.0 * math.log(max(p, 2)) / n1)


@numba.njit(cache=True)
def _soft(x, lam):
    if x > lam:
        return x - lam
    if x < -lam:
        return x + lam
    return 0.0


@numba.njit(cache=True)
def _cd_sweep(q, r, b, colsq, lam, inv_n, active_only):
    n, p = q.shape
    maxdelta = 0.0
    for j in range(p):
        if colsq[j] == 0.0:
            b[j] = 0.0
            continue
        if active_only and b[j] == 0.0:
            continue
        acc = 0.0
        for i in range(n):
            acc += q[i, j] * r[i]
        rho = acc * inv_n + colsq[j] * b[j]
        new = _soft(rho, lam) / colsq[j]
        delta = new - b[j]
        if delta != 0.0:
            for i in range(n):
                r[i] -= delta * q[i, j]
            b[j] = new
            if abs(delta) > maxdelta:
                maxdelta = abs(delta)
    return maxdelta


@numba.njit(cache=True)
def _cd_lasso(q, y, lam, b, tol, max_sweeps):
    n, p = q.shape
    inv_n = 1.0 / n
    colsq = np.zeros(p)
    for j in range(p):
        s = 0.0
        for i in range(n):
            s += q[i, j] * q[i, j]
        colsq[j] = s * inv_n
    r = y - q @ b
    sweeps = 0
    while sweeps < max_sweeps:
        full = _cd_sweep(q, r, b, colsq, lam, inv_n, False)
        sweeps += 1
        if full < tol:
            return b, sweeps, True
        while sweeps < max_sweeps:
            part = _cd_sweep(q, r, b, colsq, lam, inv_n, True)
            sweeps += 1
            if part < tol:
                break
    return b, sweeps, False


def lasso_objective(q: NDArray, y: NDArray, b: NDArray, lam: float) -> float:
    r = y - q @ b
    return 0.5 * float(r @ r) / q.shape[0] + lam * float(np.abs(b).sum())


def lasso_fit(
    fold: Fold,
    lam: float,
    warm_start: ArrayLike | None = None,
    tol: float = LASSO_TOL,
    max_sweeps: int = LASSO_MAX_SWEEPS,
) -> PilotFit:
    """Cyclic coordinate descent for ``(1/2n)||y - Qb||^2 + lam ||b||_1``."""
    _check_fold(fold)
    if lam < 0:
        raise ConfigurationError("lambda must be non-negative")
    q = np.asfortranarray(fold.design())
    if lam >= np.max(np.abs(q.T @ fold.y)) / fold.n:
        # zero satisfies the optimality conditions exactly
        return _split(np.zeros(q.shape[1]), fold.d0, "lasso", iterations=0, converged=True,
                      notes={"lambda": float(lam)})
    b0 = np.zeros(q.shape[1]) if warm_start is None else np.array(warm_start, dtype=float)
    b, sweeps, ok = _cd_lasso(q, np.ascontiguousarray(fold.y), float(lam), b0, tol, max_sweeps)
    return _split(b, fold.d0, "lasso", iterations=int(sweeps), converged=bool(ok),
                  notes={"lambda": float(lam)})


# --- logistic maximum likelihood -------------------------------------------


def logistic_nll(q: NDArray, y: NDArray, b: NDArray) -> float:
    eta = q @ b
    return float(np.mean(np.logaddexp(0.0, eta) - y * eta))


def logistic_grad(q: NDArray, y: NDArray, b: NDArray) -> NDArray[np.float64]:
    mu = LinkKind.logistic().mean(q @ b)
    return q.T @ (mu - y) / q.shape[0]


def logistic_mle(
    fold: Fold,
    warm_start: ArrayLike | None = None,
    max_iter: int = MLE_MAX_ITER,
    tol: float = MLE_GRAD_TOL,
) -> PilotFit:
    """Newton-Raphson on the mean negative log-likelihood with step halving."""
    _check_fold(fold)
    y = fold.y
    if np.any((y != 0) & (y != 1)):
        raise UsageError("logistic responses must be 0/1")
    q = fold.design()
    n, p = q.shape
    link = LinkKind.logistic()
    b = np.zeros(p) if warm_start is None else np.array(warm_start, dtype=float)
    f = logistic_nll(q, y, b)
    notes: dict = {}
    it = 0
    converged = False
    while it < max_iter:
        eta = q @ b
        mu = link.mean(eta)
        grad = q.T @ (mu - y) / n
        if np.max(np.abs(grad)) < tol:
            converged = True
            break
        w = mu * (1.0 - mu)
        hess = (q * w[:, None]).T @ q / n
        try:
            step = np.linalg.solve(hess, grad)
            if not np.all(np.isfinite(step)):
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            notes["jitter"] = True
            step = np.linalg.lstsq(hess + 1e-8 * np.eye(p), grad, rcond=None)[0]
        it += 1
        scale = 1.0
        for _ in range(30):
            cand = b - scale * step
            fc = logistic_nll(q, y, cand)
            if fc <= f:
                break
            scale *= 0.5
        else:
            notes["line_search_failed"] = True
            break
        b, f = cand, fc
        if np.linalg.norm(b) > SEPARATION_NORM:
            notes["separation"] = True
            break
    if not np.all(np.isfinite(b)):
        b = np.zeros(p)
        notes["separation"] = True
    elif converged and _saturated(link.mean(q @ b), y):
        # the gradient vanishes numerically long before the norm blows up
        notes["separation"] = True
    if notes.get("separation"):
        converged = False
    return _split(b, fold.d0, "mle", iterations=it, converged=converged, notes=notes)


def _saturated(mu: NDArray, y: NDArray, eps: float = 1e-6) -> bool:
    """True when every fitted probability matches its 0/1 response to ``eps``."""
    return bool(np.all(np.abs(y - mu) < eps))


# --- l1-regularised GLM ---------------------------------------------------


def glm_lasso_objective(q: NDArray, y: NDArray, b: NDArray, lam: float, link: LinkKind) -> float:
    eta = q @ b
    return float(np.mean(link.cumulant(eta) - y * eta)) + lam * float(np.abs(b).sum())


def glm_lasso_fit(
    fold: Fold,
    lam: float,
    link: LinkKind,
    warm_start: ArrayLike | None = None,
    tol: float = PROX_TOL,
    max_iter: int = PROX_MAX_ITER,
) -> PilotFit:
    """Accelerated proximal gradient with backtracking and adaptive restart.

    Stops when the proximal-gradient map has sup-norm below ``tol``.
    """
    _check_fold(fold)
    if lam < 0:
        raise ConfigurationError("lambda must be non-negative")
    q = fold.design()
    y = fold.y
    n, p = q.shape

    def smooth(b):
        eta = q @ b
        return float(np.mean(link.cumulant(eta) - y * eta)), q.T @ (link.mean(eta) - y) / n

    def prox(v, s):
        return np.sign(v) * np.maximum(np.abs(v) - s * lam, 0.0)

    x = np.zeros(p) if warm_start is None else np.array(warm_start, dtype=float)
    yk = x.copy()
    tk = 1.0
    step = 1.0
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        fy, gy = smooth(yk)
        while True:
            cand = prox(yk - step * gy, step)
            diff = cand - yk
            fc = smooth(cand)[0]
            if fc <= fy + gy @ diff + 0.5 * (diff @ diff) / step + 1e-15 * abs(fy):
                break
            step *= 0.5
        # gradient map at cand, measured with the accepted step
        _, gc = smooth(cand)
        gmap = (cand - prox(cand - step * gc, step)) / step
        x_prev, x = x, cand
        if np.max(np.abs(gmap)) < tol:
            converged = True
            break
        if (yk - cand) @ (cand - x_prev) > 0:
            # gradient-based momentum restart
            tk = 1.0
            yk = cand.copy()
        else:
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
            yk = cand + ((tk - 1.0) / t_next) * (cand - x_prev)
            tk = t_next
        step *= 1.25
    return _split(x, fold.d0, "glm-lasso", iterations=it, converged=converged,
                  notes={"lambda": float(lam)})


def fit_pilot(
    fold: Fold,
    method: str,
    link: LinkKind | None = None,
    lam: float | None = None,
    warm_start: ArrayLike | None = None,
) -> PilotFit:
    """Dispatch to the named pilot estimator."""
    if method == "ols":
        return ols_fit(fold)
    if method == "lasso":
        if lam is None:
            raise ConfigurationError("lasso pilot needs a penalty")
        return lasso_fit(fold, lam, warm_start=warm_start)
    if method == "mle":
        return logistic_mle(fold, warm_start=warm_start)
    if method == "glm-lasso":
        if lam is None:
            raise ConfigurationError("glm-lasso pilot needs a penalty")
        return glm_lasso_fit(fold, lam, link or LinkKind.logistic(), warm_start=warm_start)
    raise ConfigurationError(f"unknown pilot method {method!r}")
