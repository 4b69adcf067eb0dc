"""Adaptive data-generating processes driven by a UCB arm-selection rule.

Each round ``i = 1..n``:

1. a nuisance context ``Z_i`` is drawn (i.i.d. Gaussian, or AR(1) for the
   logistic process),
2. a pilot fitted on rounds ``1..i-1`` (refreshed every ``refit_every``
   rounds) supplies ``theta_hat`` to the UCB rule,
3. the UCB arm ``k*`` receives the bulk of the probability mass and every
   other arm the exploration floor ``min{1/(2 i^(2t)), 0.4/d0}``,
4. the covariate is drawn from those probabilities by inverse CDF and the
   response from the model.

Randomness comes from Philox counter-based streams, one per purpose and
replication seed, so a dataset is a pure function of ``(cfg, seed)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ConfigurationError
from .model import Dataset, Fold, LinkKind, SelectionProbs, TrueModel
from .pilot import lasso_fit, lasso_lambda, logistic_mle, universal_lambda

PilotKind = Literal["ols", "lasso", "mle"]
LassoPenalty = Literal["theory", "universal"]

P_REFERENCE = 0.2
FLOOR_MASS = 0.4

# stream purposes; the integer is part of the seed sequence
STREAM_CONTEXTS = 0
STREAM_ARMS = 1
STREAM_NOISE = 2
STREAM_TRUTH = 3


def stream(seed: int, purpose: int) -> np.random.Generator:
    """Philox generator for ``(seed, purpose)``.

    Keys come from ``SeedSequence([seed, purpose])``; distinct pairs give
    statistically independent streams.
    """
    if seed < 0:
        raise ConfigurationError("seed must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), purpose])))


@dataclass(frozen=True)
class GenConfig:
    """Parameters of one adaptive process.

    ``refit_every=None`` means 1, or 25 once ``d1 >= 200``.  ``theta_star``
    defaults to the no-margin vector of twos; ``beta_star=None`` draws it
    from N(0, I), keeping only the first ``sparsity`` entries when set.
    """

    d0: int = 2
    d1: int = 5
    n: int = 500
    n1: int = 125
    C: float = 2.0
    t: float = 0.2
    link: LinkKind = field(default_factory=LinkKind.identity)
    pilot_kind: PilotKind = "ols"
    ar_gamma: float = 0.5
    sparsity: int | None = None
    refit_every: int | None = None
    theta_star: tuple[float, ...] | None = None
    beta_star: tuple[float, ...] | None = None
    lasso_penalty: LassoPenalty | float = "theory"
    lasso_nu: float = 1.0
    lasso_B: float | None = None
    lasso_s_guess: int = 2

    def __post_init__(self) -> None:
        if self.d0 < 1 or self.d1 < 0:
            raise ConfigurationError("need d0 >= 1 and d1 >= 0")
        if self.n < 2 or not 1 <= self.n1 < self.n:
            raise ConfigurationError("need n >= 2 and 1 <= n1 < n")
        if not self.C > 0:
            raise ConfigurationError("C must be positive")
        if not 0.0 <= self.t < 0.5:
            raise ConfigurationError("t must lie in [0, 1/2)")
        if not 0.0 <= self.ar_gamma < 1.0:
            raise ConfigurationError("ar_gamma must lie in [0, 1)")
        if self.pilot_kind not in ("ols", "lasso", "mle"):
            raise ConfigurationError(f"unknown pilot kind {self.pilot_kind!r}")
        if self.pilot_kind == "mle" and self.link.is_identity:
            raise ConfigurationError("mle pilot needs the logistic link")
        if self.refit_every is not None and self.refit_every < 1:
            raise ConfigurationError("refit_every must be >= 1")
        if self.sparsity is not None and not 0 <= self.sparsity <= self.d1:
            raise ConfigurationError("sparsity must lie in [0, d1]")
        if self.theta_star is not None and len(self.theta_star) != self.d0:
            raise ConfigurationError("theta_star must have length d0")
        if self.beta_star is not None and len(self.beta_star) != self.d1:
            raise ConfigurationError("beta_star must have length d1")
        if isinstance(self.lasso_penalty, str):
            if self.lasso_penalty not in ("theory", "universal"):
                raise ConfigurationError(f"unknown lasso penalty {self.lasso_penalty!r}")
        elif not self.lasso_penalty >= 0:
            raise ConfigurationError("lasso penalty must be non-negative")

    @property
    def refit_cadence(self) -> int:
        if self.refit_every is not None:
            return self.refit_every
        return 25 if self.d1 >= 200 else 1

    def to_dict(self) -> dict:
        out = asdict(self)
        out["link"] = {"kind": self.link.kind, "noise_sd": self.link.noise_sd}
        out["refit_every"] = self.refit_cadence
        return out


@dataclass
class ArmCounts:
    """How often each arm ``1..d0`` has been drawn so far."""

    counts: NDArray[np.int64]

    @classmethod
    def zeros(cls, d0: int) -> "ArmCounts":
        return cls(np.zeros(d0, dtype=np.int64))

    def record(self, arm: int) -> None:
        if arm >= 1:
            self.counts[arm - 1] += 1


def ucb_select(theta_hat: ArrayLike, counts: ArmCounts | ArrayLike, C: float, n: int) -> int:
    """``argmax_k theta_hat_k + sqrt(C log n / n_k)``, returned as ``1..d0``.

    Unexplored arms get an infinite bonus; ties go to the smallest index.
    """
    if n < 2:
        raise ConfigurationError("horizon n must be >= 2")
    theta = np.asarray(theta_hat, dtype=float)
    cnt = np.asarray(counts.counts if isinstance(counts, ArmCounts) else counts)
    if cnt.shape != theta.shape:
        raise ConfigurationError("theta_hat and counts differ in length")
    best, best_k = -math.inf, 1
    log_n = math.log(n)
    for k in range(theta.shape[0]):
        score = math.inf if cnt[k] == 0 else theta[k] + math.sqrt(C * log_n / cnt[k])
        if score > best:
            best, best_k = score, k + 1
    return best_k


def assemble_probs(k_star: int, i: int, t: float, d0: int) -> SelectionProbs:
    """Reference arm 0.2, floor ``min{1/(2 i^(2t)), 0.4/d0}``, rest to ``k*``."""
    if not 1 <= k_star <= d0 or i < 1:
        raise ConfigurationError("need 1 <= k_star <= d0 and i >= 1")
    floor = min(1.0 / (2.0 * i ** (2.0 * t)), FLOOR_MASS / d0)
    p = np.full(d0, floor)
    p[k_star - 1] = 0.0
    chosen = 1.0 - P_REFERENCE - math.fsum(p.tolist())
    if not chosen > 0:
        raise ConfigurationError(f"chosen-arm probability {chosen!r} is not positive")
    p[k_star - 1] = chosen
    return SelectionProbs(p, P_REFERENCE)


def draw_arm(full_probs: NDArray[np.float64], uniform: float) -> int:
    """Inverse-CDF draw over the ordering ``(p0, p1, ..., pd0)``."""
    cdf = np.cumsum(full_probs)
    return int(min(np.searchsorted(cdf, uniform, side="right"), full_probs.shape[0] - 1))


def resolve_truth(cfg: GenConfig, seed: int) -> TrueModel:
    """Fix ``theta*`` and ``beta*`` for an experiment from its base seed."""
    theta = np.full(cfg.d0, 2.0) if cfg.theta_star is None else np.array(cfg.theta_star, float)
    if cfg.beta_star is not None:
        beta = np.array(cfg.beta_star, dtype=float)
    else:
        beta = stream(seed, STREAM_TRUTH).standard_normal(cfg.d1)
        if cfg.sparsity is not None:
            beta[cfg.sparsity:] = 0.0
    return TrueModel(theta, beta, cfg.link)


def pilot_penalty(cfg: GenConfig, n_rows: int, z: NDArray[np.float64]) -> float:
    """Lasso penalty for a fit on ``n_rows`` rows."""
    if not isinstance(cfg.lasso_penalty, str):
        return float(cfg.lasso_penalty)
    p = cfg.d0 + cfg.d1
    if cfg.lasso_penalty == "universal":
        return universal_lambda(n_rows, p, cfg.link.noise_sd)
    B = cfg.lasso_B
    if B is None:
        B = float(np.max(np.linalg.norm(z, axis=1))) if z.size else 1.0
    # the formula needs t < 1/4; larger exploration exponents are clipped
    t = min(cfg.t, 0.2499)
    return lasso_lambda(n_rows, cfg.lasso_nu, B, cfg.d0, cfg.d1, t, cfg.lasso_s_guess)


class _HistoryPilot:
    """Pilot refitted on the growing history inside a generator."""

    def __init__(self, cfg: GenConfig, n: int, p: int):
        self.cfg = cfg
        self.d0 = cfg.d0
        self.gram = np.zeros((p, p))
        self.qty = np.zeros(p)
        self.coef = np.zeros(p)
        self.fallbacks = 0
        self.fits = 0

    def add(self, q_row: NDArray[np.float64], y: float) -> None:
        if self.cfg.pilot_kind == "ols":
            self.gram += np.outer(q_row, q_row)
            self.qty += q_row * y

    def refit(self, q: NDArray, y: NDArray, arms: NDArray, probs: NDArray) -> None:
        self.fits += 1
        kind = self.cfg.pilot_kind
        if kind == "ols":
            # minimum-norm solution of the normal equations equals that of lstsq
            self.coef = np.linalg.lstsq(self.gram, self.qty, rcond=None)[0]
            return
        d0 = self.d0
        fold = Fold(arms, q[:, d0:], y, probs)
        if kind == "lasso":
            lam = pilot_penalty(self.cfg, fold.n, fold.z)
            self.coef = lasso_fit(fold, lam, warm_start=self.coef).coef
            return
        fit = logistic_mle(fold, warm_start=self.coef if self._warm else None)
        if fit.converged and np.all(np.isfinite(fit.coef)):
            self.coef = fit.coef
            self._warm = True
        else:
            self.coef = np.zeros_like(self.coef)
            self._warm = False
            self.fallbacks += 1

    _warm = False

    @property
    def theta(self) -> NDArray[np.float64]:
        return self.coef[: self.d0]


def _generate(cfg: GenConfig, seed: int, truth: TrueModel | None, logistic: bool):
    truth = resolve_truth(cfg, seed) if truth is None else truth
    d0, d1, n = cfg.d0, cfg.d1, cfg.n
    ctx = stream(seed, STREAM_CONTEXTS).standard_normal((n, d1))
    if logistic:
        z = np.empty_like(ctx)
        prev = np.zeros(d1)
        for i in range(n):
            prev = cfg.ar_gamma * prev + ctx[i]
            z[i] = prev
    else:
        z = ctx
    u_arm = stream(seed, STREAM_ARMS).random(n)
    noise_rng = stream(seed, STREAM_NOISE)
    noise = noise_rng.random(n) if logistic else noise_rng.standard_normal(n)

    p = d0 + d1
    q = np.zeros((n, p))
    q[:, d0:] = z
    arms = np.zeros(n, dtype=np.int64)
    y = np.zeros(n)
    probs = np.zeros((n, d0 + 1))
    k_stars = np.zeros(n, dtype=np.int64)
    counts = ArmCounts.zeros(d0)
    pilot = _HistoryPilot(cfg, n, p)
    cadence = cfg.refit_cadence
    h_true = z @ truth.beta_star

    for i in range(1, n + 1):
        r = i - 1
        if r >= 1 and (r - 1) % cadence == 0:
            pilot.refit(q[:r], y[:r], arms[:r], probs[:r])
        k = ucb_select(pilot.theta, counts, cfg.C, n)
        sp = assemble_probs(k, i, cfg.t, d0)
        full = sp.full
        arm = draw_arm(full, u_arm[r])
        eta = (truth.theta_star[arm - 1] if arm else 0.0) + h_true[r]
        if logistic:
            resp = 1.0 if noise[r] < float(cfg.link.mean(np.array(eta))) else 0.0
        else:
            resp = eta + cfg.link.noise_sd * noise[r]
        k_stars[r] = k
        arms[r] = arm
        probs[r] = full
        y[r] = resp
        if arm:
            q[r, arm - 1] = 1.0
        counts.record(arm)
        pilot.add(q[r], resp)

    meta = {
        "seed": int(seed),
        "refit_every": cadence,
        "pilot_fits": pilot.fits,
        "pilot_fallbacks": pilot.fallbacks,
        "k_star": k_stars.tolist(),
        "generator": "logistic" if logistic else "linear",
    }
    return Dataset(arms, z, y, probs, cfg.n1, meta), truth


def gen_linear_adaptive(
    cfg: GenConfig, seed: int, truth: TrueModel | None = None
) -> tuple[Dataset, TrueModel]:
    """Adaptive linear model with Gaussian contexts and noise.

    ``truth`` fixes the parameters across replications; by default it is
    resolved from ``seed``.
    """
    if not cfg.link.is_identity:
        raise ConfigurationError("gen_linear_adaptive needs the identity link")
    return _generate(cfg, seed, truth, logistic=False)


def gen_logistic_adaptive(
    cfg: GenConfig, seed: int, truth: TrueModel | None = None
) -> tuple[Dataset, TrueModel]:
    """Adaptive logistic model with AR(1) contexts and an MLE-driven policy.

    Rounds whose MLE fails (early separation) use a zero pilot for UCB; the
    count is in ``meta["pilot_fallbacks"]``.
    """
    if cfg.link.is_identity:
        raise ConfigurationError("gen_logistic_adaptive needs the logistic link")
    if cfg.pilot_kind != "mle":
        cfg = replace(cfg, pilot_kind="mle")
    return _generate(cfg, seed, truth, logistic=True)


def generate(cfg: GenConfig, seed: int, truth: TrueModel | None = None) -> tuple[Dataset, TrueModel]:
    if cfg.link.is_identity:
        return gen_linear_adaptive(cfg, seed, truth)
    return gen_logistic_adaptive(cfg, seed, truth)


def write_metadata_json(cfg: GenConfig, seed: int, truth: TrueModel, dataset: Dataset,
                        path: str | Path) -> None:
    """Record config, seed, refit cadence and true parameters next to a CSV."""
    doc = {
        "config": cfg.to_dict(),
        "seed": int(seed),
        "refit_every": cfg.refit_cadence,
        "theta_star": truth.theta_star.tolist(),
        "beta_star": truth.beta_star.tolist(),
        "pilot_fallbacks": dataset.meta.get("pilot_fallbacks", 0),
        "split_at": dataset.split_at,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
