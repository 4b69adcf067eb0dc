"""Confidence intervals, chi-square regions and coverage summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import UsageError
from .estimators import DirSolution, GLMSolution, PLSolution

IntervalKind = Literal["two-sided", "upper", "lower"]
# even grid 0.80..0.98 plus the conventional 0.95
DEFAULT_LEVELS = tuple(sorted({round(0.80 + 0.02 * k, 2) for k in range(10)} | {0.95}))


# --- normal distribution ---------------------------------------------------

# Acklam's rational approximation to the normal quantile.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    if p > 1.0 - _P_LOW:
        return -_acklam(1.0 - p)
    q = p - 0.5
    r = q * q
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
        ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    )


def inv_normal_cdf(p: float) -> float:
    """Standard normal quantile (rational approximation + Halley refinement)."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise UsageError(f"probability must lie in (0, 1), got {p!r}")
    if p > 0.5:
        return -inv_normal_cdf(1.0 - p)
    if p == 0.5:
        return 0.0
    x = _acklam(p)
    # tail-accurate residual via erfc for p <= 0.5
    e = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


# --- intervals -------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    """Confidence set ``[lo, hi]`` for a scalar target.

    ``upper`` is the one-sided set ``[est - q se, +inf)``; it fails when the
    estimate overshoots.  ``lower`` is ``(-inf, est + q se]``; it fails when
    the estimate falls in the lower tail, i.e. under downward bias.
    """

    lo: float
    hi: float
    level: float
    kind: IntervalKind

    def __post_init__(self) -> None:
        if self.kind == "two-sided" and self.lo > self.hi:
            raise UsageError("two-sided interval with lo > hi")

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo


def interval_from_se(estimate: float, se: float, level: float, kind: IntervalKind) -> Interval:
    if not 0.0 < level < 1.0:
        raise UsageError("level must lie in (0, 1)")
    alpha = 1.0 - level
    if kind == "two-sided":
        q = inv_normal_cdf(1.0 - alpha / 2.0)
        return Interval(estimate - q * se, estimate + q * se, level, kind)
    q = inv_normal_cdf(1.0 - alpha)
    if kind == "upper":
        return Interval(estimate - q * se, math.inf, level, kind)
    if kind == "lower":
        return Interval(-math.inf, estimate + q * se, level, kind)
    raise UsageError(f"unknown interval kind {kind!r}")


def dir_standard_error(sol: DirSolution, sigma: float = 1.0) -> float:
    return sigma / (math.sqrt(sol.n2) * sol.scale_bar)


def dir_interval(
    sol: DirSolution, sigma: float, alpha: float, kind: IntervalKind = "two-sided"
) -> Interval:
    """Interval for ``<u, theta>`` from a scalar solution.

    For GLM solutions pass ``sigma=1``: the limit law is already standardised.
    """
    if not 0.0 < alpha < 1.0:
        raise UsageError("alpha must lie in (0, 1)")
    if not sol.scale_bar > 0:
        raise UsageError("scale_bar must be positive")
    return interval_from_se(sol.theta_u, dir_standard_error(sol, sigma), 1.0 - alpha, kind)


def vector_covariance(sol: PLSolution | GLMSolution, sigma: float | None = None) -> NDArray:
    """Asymptotic covariance of ``theta`` implied by the solution's scaling."""
    inv = np.linalg.inv(sol.scaling)
    if isinstance(sol, PLSolution):
        s = sol.sigma_noise if sigma is None else sigma
        return s**2 * (inv @ inv.T) / sol.n2
    return (inv @ inv.T) / sol.n2


def vector_direction_se(sol: PLSolution | GLMSolution, u: ArrayLike, sigma: float | None = None) -> float:
    u = np.asarray(u, dtype=float)
    return math.sqrt(float(u @ vector_covariance(sol, sigma) @ u))


def chi2_region_stat(
    sol: PLSolution | GLMSolution, theta_probe: ArrayLike, sigma: float | None = None
) -> float:
    """``||sqrt(n2) S (theta - probe)||^2 / sigma^2``; compare to a chi2(d0) quantile."""
    if isinstance(sol, PLSolution):
        s = sol.sigma_noise if sigma is None else sigma
    else:
        s = 1.0
    diff = sol.theta - np.asarray(theta_probe, dtype=float)
    v = math.sqrt(sol.n2) * (sol.scaling @ diff) / s
    return float(v @ v)


# --- coverage --------------------------------------------------------------


def ks_statistic(sample: ArrayLike) -> float:
    """One-sample Kolmogorov-Smirnov distance to N(0, 1)."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.shape[0]
    if n == 0:
        raise UsageError("empty sample")
    cdf = np.array([normal_cdf(v) for v in x.tolist()])
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


@dataclass(frozen=True)
class CoverageStats:
    coverage: float
    se: float
    mean_width: float
    count: int
    z_mean: float = math.nan
    z_sd: float = math.nan
    ks: float = math.nan


def coverage_stats(
    truth: float, intervals: Sequence[Interval], std_errors: Sequence[float] | None = None
) -> CoverageStats:
    """Fraction of intervals containing ``truth``, its binomial SE, mean width.

    When standardized errors are given their mean, SD and KS distance to
    N(0, 1) are attached.
    """
    if not intervals:
        raise UsageError("no intervals")
    kinds = {iv.kind for iv in intervals}
    levels = {iv.level for iv in intervals}
    if len(kinds) != 1 or len(levels) != 1:
        raise UsageError("intervals must share level and kind")
    t = len(intervals)
    c = sum(iv.contains(truth) for iv in intervals) / t
    width = math.fsum(iv.width for iv in intervals) / t if kinds == {"two-sided"} else math.inf
    extra = {}
    if std_errors is not None:
        z = np.asarray(std_errors, dtype=float)
        if z.size == 0:
            raise UsageError("empty standardized-error sample")
        extra = {
            "z_mean": float(np.mean(z)),
            "z_sd": float(np.std(z, ddof=1)) if z.size > 1 else math.nan,
            "ks": ks_statistic(z),
        }
    return CoverageStats(c, math.sqrt(c * (1.0 - c) / t), width, t, **extra)


@dataclass(frozen=True)
class CoverageReport:
    levels: tuple[float, ...]
    cov_upper: tuple[float, ...]
    cov_lower: tuple[float, ...]
    cov_two: tuple[float, ...]
    se_upper: tuple[float, ...]
    se_lower: tuple[float, ...]
    se_two: tuple[float, ...]
    mean_width: tuple[float, ...]
    std_errors: tuple[float, ...]
    count: int

    @property
    def z_mean(self) -> float:
        return float(np.mean(self.std_errors))

    @property
    def z_sd(self) -> float:
        return float(np.std(self.std_errors, ddof=1)) if self.count > 1 else math.nan

    @property
    def ks(self) -> float:
        return ks_statistic(self.std_errors)

    def at(self, level: float) -> dict:
        k = min(range(len(self.levels)), key=lambda j: abs(self.levels[j] - level))
        if abs(self.levels[k] - level) > 1e-9:
            raise KeyError(level)
        return {
            "upper": self.cov_upper[k], "lower": self.cov_lower[k], "two": self.cov_two[k],
            "width": self.mean_width[k],
        }

    def rows(self) -> list[dict]:
        return [
            {
                "level": self.levels[k],
                "cov_upper": self.cov_upper[k],
                "cov_lower": self.cov_lower[k],
                "cov_two": self.cov_two[k],
                "se_upper": self.se_upper[k],
                "se_lower": self.se_lower[k],
                "se_two": self.se_two[k],
                "mean_width": self.mean_width[k],
            }
            for k in range(len(self.levels))
        ]


def coverage_report(
    truth: float,
    estimates: Sequence[float],
    ses: Sequence[float],
    levels: Sequence[float] = DEFAULT_LEVELS,
) -> CoverageReport:
    """Coverage of normal intervals ``estimate +/- q se`` across replications."""
    if len(estimates) == 0 or len(estimates) != len(ses):
        raise UsageError("estimates and ses must be non-empty and of equal length")
    cols: dict[str, list[float]] = {k: [] for k in
                                    ("cu", "cl", "c2", "su", "sl", "s2", "w")}
    for level in levels:
        stats = {}
        for kind in ("upper", "lower", "two-sided"):
            ivs = [interval_from_se(e, s, level, kind) for e, s in zip(estimates, ses)]
            stats[kind] = coverage_stats(truth, ivs)
        cols["cu"].append(stats["upper"].coverage)
        cols["cl"].append(stats["lower"].coverage)
        cols["c2"].append(stats["two-sided"].coverage)
        cols["su"].append(stats["upper"].se)
        cols["sl"].append(stats["lower"].se)
        cols["s2"].append(stats["two-sided"].se)
        cols["w"].append(stats["two-sided"].mean_width)
    z = tuple((e - truth) / s for e, s in zip(estimates, ses))
    return CoverageReport(
        tuple(levels), tuple(cols["cu"]), tuple(cols["cl"]), tuple(cols["c2"]),
        tuple(cols["su"]), tuple(cols["sl"]), tuple(cols["s2"]), tuple(cols["w"]),
        z, len(estimates),
    )
