"""Two-stage Z-estimators on the second fold.

Every estimating equation here is an average over fold-2 samples.  Averages
are taken with :func:`math.fsum` so the result is exactly rounded and does
not depend on the order of the samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateDesignError, RootBracketingError
from .glmweights import GlmWeights, glm_weights
from .model import Dataset, Fold, LinkKind, Sample
from .pilot import PilotFit, logistic_mle
from .probvec import cov_inv_sqrt, cov_matrix, cov_sqrt, direction_weight, sym_sqrt, _unit

COND_LIMIT = 1e12
NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 100
MAX_HALVINGS = 30
BRACKET_RADIUS = 1e3
BISECT_TOL = 1e-12


@dataclass(frozen=True)
class PLSolution:
    theta: NDArray[np.float64]
    scaling: NDArray[np.float64]
    n2: int
    sigma_noise: float
    diagnostics: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class DirSolution:
    theta_u: float
    scale_bar: float
    n2: int
    u: NDArray[np.float64]
    iterations: int = 0
    converged: bool = True
    diagnostics: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class GLMSolution:
    theta: NDArray[np.float64]
    scaling: NDArray[np.float64]
    n2: int
    newton_iters: int
    converged: bool
    diagnostics: dict = field(default_factory=dict, compare=False)


# --- numerics ------------------------------------------------------------


def exact_mean(terms: ArrayLike) -> NDArray[np.float64]:
    """Exactly rounded mean over axis 0 (order independent)."""
    terms = np.asarray(terms, dtype=float)
    n = terms.shape[0]
    flat = terms.reshape(n, -1)
    out = np.array([math.fsum(col) for col in flat.T.tolist()]) / n
    return out.reshape(terms.shape[1:])


def gauss_jordan_solve(a: ArrayLike, b: ArrayLike) -> NDArray[np.float64]:
    """Solve ``a x = b`` by Gauss-Jordan elimination with partial pivoting."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    n = a.shape[0]
    rhs = b.reshape(n, -1)
    aug = np.hstack([a, rhs])
    for col in range(n):
        piv = col + int(np.argmax(np.abs(aug[col:, col])))
        if aug[piv, col] == 0.0:
            raise DegenerateDesignError("singular linear system")
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        aug[col] /= aug[col, col]
        for row in range(n):
            if row != col and aug[row, col] != 0.0:
                aug[row] -= aug[row, col] * aug[col]
    sol = aug[:, n:]
    return sol.reshape(b.shape)


def _check_conditioning(a: NDArray, fold: Fold, what: str) -> None:
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        counts = np.bincount(fold.arms, minlength=fold.d0 + 1)[1:]
        missing = [k + 1 for k in range(fold.d0) if counts[k] == 0]
        hint = f"; arms never drawn in fold 2: {missing}" if missing else ""
        raise DegenerateDesignError(
            f"{what} is singular (condition number {cond:.3g}){hint}"
        )


# --- partial linear model ---------------------------------------------------


def pl_score(sample: Sample, theta: ArrayLike, h_val: float) -> NDArray[np.float64]:
    """``Sigma^{-1/2} (x - p) (y - <x, theta> - h)`` for one sample."""
    x = sample.x()
    resid = sample.y - float(x @ np.asarray(theta, dtype=float)) - h_val
    return cov_inv_sqrt(sample.probs) @ (x - sample.probs.p) * resid


def adaptz_pl(dataset: Dataset, pilot: PilotFit, sigma: float = 1.0) -> PLSolution:
    """Solve the whitened linear estimating equations on fold 2.

    Only the nuisance part of the pilot enters; ``pilot.theta_hat`` is unused.
    """
    fold = dataset.fold(2)
    x = fold.x()
    h = pilot.h(fold.z)
    v = np.einsum("nab,nb->na", cov_inv_sqrt(fold.probs), x - fold.probs[:, 1:])
    a = exact_mean(v[:, :, None] * x[:, None, :])
    b = exact_mean(v * (fold.y - h)[:, None])
    _check_conditioning(a, fold, "fold-2 design matrix")
    theta = gauss_jordan_solve(a, b)
    scaling = exact_mean(cov_sqrt(fold.probs))
    return PLSolution(theta, scaling, fold.n, float(sigma),
                      {"jacobian_min_sv": float(np.linalg.svd(a, compute_uv=False)[-1])})


def pl_direction(dataset: Dataset, u: ArrayLike, pilot: PilotFit) -> DirSolution:
    """Scalar estimating equation for ``<u, theta>``."""
    u = _unit(u)
    fold = dataset.fold(2)
    x = fold.x()
    w, scale = direction_weight(fold.probs, u)
    r = np.einsum("na,na->n", w, x - fold.probs[:, 1:])
    proj = np.eye(u.shape[0]) - np.outer(u, u)
    offset = x @ (proj @ pilot.theta_hat) + pilot.h(fold.z)
    xu = x @ u
    num = math.fsum((r * (fold.y - offset)).tolist())
    den = math.fsum((r * xu).tolist())
    if den == 0.0 or not np.isfinite(den):
        raise DegenerateDesignError(
            "direction equation is degenerate: no fold-2 sample loads on u"
        )
    return DirSolution(num / den, float(exact_mean(scale)), fold.n, u,
                       diagnostics={"slope": den / fold.n})


def unweighted_z(dataset: Dataset, pilot: PilotFit, sigma: float = 1.0) -> PLSolution:
    """Z-estimator with the unweighted score ``(x - p)(y - <x, theta> - h)``.

    The reported scaling is ``(mean Sigma_i)^{1/2}``.
    """
    fold = dataset.fold(2)
    x = fold.x()
    h = pilot.h(fold.z)
    dev = x - fold.probs[:, 1:]
    a = exact_mean(dev[:, :, None] * x[:, None, :])
    b = exact_mean(dev * (fold.y - h)[:, None])
    _check_conditioning(a, fold, "unweighted fold-2 design matrix")
    theta = gauss_jordan_solve(a, b)
    scaling = sym_sqrt(exact_mean(cov_matrix(fold.probs)))
    return PLSolution(theta, scaling, fold.n, float(sigma))


# --- generalized linear model ----------------------------------------------


def glm_score(
    sample: Sample, weights: GlmWeights, theta: ArrayLike, h_val: float, link: LinkKind
) -> NDArray[np.float64]:
    """``Omega (x - m) (y - g(<x, theta> + h))`` with weights fixed at the pilot."""
    x = sample.x()
    eta = float(x @ np.asarray(theta, dtype=float)) + h_val
    resid = sample.y - float(link.mean(np.array([eta]))[0])
    return weights.omega @ (x - weights.m) * resid


def fold_glm_weights(fold: Fold, pilot: PilotFit, link: LinkKind) -> GlmWeights:
    return glm_weights(fold.probs, pilot.theta_hat, pilot.h(fold.z), link)


def adaptz_glm(dataset: Dataset, pilot: PilotFit, link: LinkKind) -> GLMSolution:
    """Newton's method with step halving on the GLM estimating equations."""
    fold = dataset.fold(2)
    x = fold.x()
    h = pilot.h(fold.z)
    wts = fold_glm_weights(fold, pilot, link)
    dev = x - wts.m
    v = np.einsum("nab,nb->na", wts.omega, dev)
    y = fold.y

    def residual(theta):
        mu = link.mean(x @ theta + h)
        return exact_mean(v * (y - mu)[:, None])

    def jacobian(theta):
        gp = link.derivative(x @ theta + h)
        return -exact_mean((v * gp[:, None])[:, :, None] * x[:, None, :])

    theta = np.array(pilot.theta_hat, dtype=float)
    f = residual(theta)
    fnorm = float(np.linalg.norm(f))
    it = 0
    converged = bool(np.max(np.abs(f)) < NEWTON_TOL)
    halving_failures = 0
    while not converged and it < NEWTON_MAX_ITER:
        jac = jacobian(theta)
        _check_conditioning(jac, fold, "GLM Jacobian")
        step = gauss_jordan_solve(jac, f)
        it += 1
        scale = 1.0
        for _ in range(MAX_HALVINGS + 1):
            cand = theta - scale * step
            fc = residual(cand)
            if np.all(np.isfinite(fc)) and np.linalg.norm(fc) < fnorm:
                break
            scale *= 0.5
        else:
            halving_failures += 1
            break
        theta, f, fnorm = cand, fc, float(np.linalg.norm(fc))
        converged = bool(np.max(np.abs(f)) < NEWTON_TOL)

    gp_pilot = link.derivative(x @ pilot.theta_hat + h)
    scaling = exact_mean((v * gp_pilot[:, None])[:, :, None] * dev[:, None, :])
    jac = jacobian(theta)
    diag = {
        "residual_inf": float(np.max(np.abs(f))),
        "jacobian_min_sv": float(np.linalg.svd(jac, compute_uv=False)[-1]),
        "line_search_failures": halving_failures,
    }
    return GLMSolution(theta, scaling, fold.n, it, converged, diag)


def glm_direction(
    dataset: Dataset, u: ArrayLike, pilot: PilotFit, link: LinkKind
) -> DirSolution:
    """Scalar GLM estimating equation for ``<u, theta>``.

    Newton from ``<u, theta_hat>``; if that fails the root is bracketed by
    geometric expansion and refined by bisection.
    """
    u = _unit(u)
    fold = dataset.fold(2)
    x = fold.x()
    h = pilot.h(fold.z)
    wts = fold_glm_weights(fold, pilot, link)
    dev = x - wts.m
    omega2 = wts.omega @ wts.omega
    o2u = omega2 @ u
    w = o2u / np.sqrt(o2u @ u)[:, None]
    r = np.einsum("na,na->n", w, dev)
    proj = np.eye(u.shape[0]) - np.outer(u, u)
    offset = x @ (proj @ pilot.theta_hat) + h
    xu = x @ u
    y = fold.y
    n = fold.n

    def f(s):
        return math.fsum((r * (y - link.mean(xu * s + offset))).tolist()) / n

    def fprime(s):
        return -math.fsum((r * link.derivative(xu * s + offset) * xu).tolist()) / n

    gp_pilot = link.derivative(x @ pilot.theta_hat + h)
    v_cov = math.fsum((r * gp_pilot * (dev @ u)).tolist()) / n

    s0 = float(u @ pilot.theta_hat)
    s, it, ok = _scalar_newton(f, fprime, s0)
    method = "newton"
    if not ok:
        s, bis_it = _bracket_bisect(f, s0)
        it += bis_it
        ok = True
        method = "bisection"
    return DirSolution(s, v_cov, n, u, iterations=it, converged=ok,
                       diagnostics={"root_method": method, "residual": f(s)})


def _scalar_newton(f, fprime, s0: float) -> tuple[float, int, bool]:
    s = s0
    fs = f(s)
    for it in range(1, NEWTON_MAX_ITER + 1):
        if fs == 0.0:
            return s, it - 1, True
        d = fprime(s)
        if d == 0.0 or not math.isfinite(d):
            return s, it, False
        step = fs / d
        scale = 1.0
        for _ in range(MAX_HALVINGS + 1):
            cand = s - scale * step
            fc = f(cand)
            if math.isfinite(fc) and abs(fc) < abs(fs):
                break
            scale *= 0.5
        else:
            return s, it, abs(fs) < NEWTON_TOL
        moved = abs(cand - s)
        s, fs = cand, fc
        if moved <= BISECT_TOL * max(1.0, abs(s)) or abs(fs) < 1e-15:
            return s, it, abs(fs) < NEWTON_TOL
    return s, NEWTON_MAX_ITER, False


def _bracket_bisect(f, s0: float) -> tuple[float, int]:
    f0 = f(s0)
    if f0 == 0.0:
        return s0, 0
    radius = 1.0
    lo = hi = None
    while radius <= BRACKET_RADIUS:
        for cand in (s0 - radius, s0 + radius):
            if f(cand) * f0 < 0:
                lo, hi = sorted((s0, cand))
                break
        if lo is not None:
            break
        radius *= 2.0
    if lo is None:
        raise RootBracketingError(
            f"no sign change within radius {BRACKET_RADIUS:g} of {s0:.6g}"
        )
    flo = f(lo)
    it = 0
    while hi - lo > BISECT_TOL * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        it += 1
        if fm == 0.0:
            return mid, it
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi), it


# --- full-sample baselines ------------------------------------------------


def ols_full(dataset: Dataset, sigma: float = 1.0) -> tuple[NDArray, NDArray]:
    """OLS on all samples; returns ``(theta, cov(theta))`` with known ``sigma``."""
    q = dataset.design()
    gram = q.T @ q
    if np.linalg.cond(gram) > COND_LIMIT:
        raise DegenerateDesignError("full-sample OLS design is singular")
    coef = np.linalg.solve(gram, q.T @ dataset.y)
    cov = sigma**2 * np.linalg.inv(gram)
    d0 = dataset.d0
    return coef[:d0], cov[:d0, :d0]


def mle_full(dataset: Dataset) -> tuple[NDArray, NDArray, bool]:
    """Logistic MLE on all samples with inverse-Fisher covariance."""
    fit = logistic_mle(Fold(dataset.arms, dataset.z, dataset.y, dataset.probs))
    if not fit.converged:
        return fit.theta_hat, np.full((dataset.d0, dataset.d0), np.nan), False
    q = dataset.design()
    mu = LinkKind.logistic().mean(q @ fit.coef)
    info = (q * (mu * (1 - mu))[:, None]).T @ q
    if np.linalg.cond(info) > COND_LIMIT:
        raise DegenerateDesignError("Fisher information is singular")
    cov = np.linalg.inv(info)
    d0 = dataset.d0
    return fit.theta_hat, cov[:d0, :d0], True


def sigma_plugin(dataset: Dataset) -> float:
    """Noise SD from the fold-1 mean squared OLS residual."""
    fold = dataset.fold(1)
    q = fold.design()
    coef = np.linalg.lstsq(q, fold.y, rcond=None)[0]
    resid = fold.y - q @ coef
    return math.sqrt(float(np.mean(resid**2)))

