"""Monte Carlo experiment runner.

A replication ``r`` generates data with seed ``base_seed + r``, fits the
pilot on fold 1, runs every selected estimator on fold 2 and records the
estimate of ``<u, theta*>`` with its standard error.  Replications run in a
process pool and are merged by index, so outputs do not depend on the
number of workers.
"""

from __future__ import annotations

import configparser
import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.stats import chi2

from .datagen import GenConfig, generate, pilot_penalty, resolve_truth
from .errors import AdaptzError, ConfigurationError, UsageError
from .estimators import (
    adaptz_glm,
    adaptz_pl,
    glm_direction,
    mle_full,
    ols_full,
    pl_direction,
    sigma_plugin,
    unweighted_z,
)
from .inference import (
    DEFAULT_LEVELS,
    CoverageReport,
    chi2_region_stat,
    coverage_report,
    dir_standard_error,
    vector_direction_se,
)
from .model import Dataset, LinkKind, TrueModel
from .pilot import PilotFit, fit_pilot

ESTIMATORS = (
    "adaptz-pl",
    "pl-direction",
    "adaptz-glm",
    "glm-direction",
    "unweighted-z",
    "ols",
    "mle",
)
LINEAR_ONLY = {"adaptz-pl", "pl-direction", "unweighted-z", "ols"}
LOGISTIC_ONLY = {"mle"}
UNRELIABLE_FRACTION = 0.05
CHI2_LEVEL = 0.95


@dataclass(frozen=True)
class ExperimentConfig:
    gen: GenConfig = field(default_factory=GenConfig)
    reps: int = 1000
    estimators: tuple[str, ...] = ("adaptz-pl", "pl-direction", "unweighted-z", "ols")
    u: tuple[float, ...] | None = None
    levels: tuple[float, ...] = DEFAULT_LEVELS
    base_seed: int = 0
    workers: int = 1
    output_dir: str | None = None
    pilot: str | None = None
    sigma: float | str | None = None
    svg: bool = False
    name: str = "custom"

    def __post_init__(self) -> None:
        if self.reps < 1:
            raise ConfigurationError("reps must be >= 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        if self.base_seed < 0:
            raise ConfigurationError("seed must be non-negative")
        if not self.estimators:
            raise ConfigurationError("no estimators selected")
        for est in self.estimators:
            if est not in ESTIMATORS:
                raise ConfigurationError(
                    f"unknown estimator {est!r}; choose from {', '.join(ESTIMATORS)}"
                )
            if est in LINEAR_ONLY and not self.gen.link.is_identity:
                raise ConfigurationError(f"{est} needs the identity link")
            if est in LOGISTIC_ONLY and self.gen.link.is_identity:
                raise ConfigurationError(f"{est} needs the logistic link")
        levels = list(self.levels)
        if not levels or levels != sorted(levels) or not all(0 < v < 1 for v in levels):
            raise ConfigurationError("levels must be sorted values in (0, 1)")
        u = self.direction
        if abs(float(np.linalg.norm(u)) - 1.0) > 1e-10:
            raise ConfigurationError("direction u must have unit norm")
        if isinstance(self.sigma, str) and self.sigma != "plugin":
            raise ConfigurationError("sigma must be a number or 'plugin'")

    @property
    def direction(self) -> NDArray[np.float64]:
        if self.u is None:
            e1 = np.zeros(self.gen.d0)
            e1[0] = 1.0
            return e1
        u = np.array(self.u, dtype=float)
        if u.shape != (self.gen.d0,):
            raise ConfigurationError("direction u must have length d0")
        return u

    @property
    def pilot_method(self) -> str:
        return self.pilot or self.gen.pilot_kind

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "gen": self.gen.to_dict(),
            "reps": self.reps,
            "estimators": list(self.estimators),
            "u": self.direction.tolist(),
            "levels": list(self.levels),
            "base_seed": self.base_seed,
            "workers": self.workers,
            "pilot": self.pilot_method,
            "sigma": self.sigma if self.sigma is not None else self.gen.link.noise_sd,
        }


# --- presets -------------------------------------------------------------

_HIGH_DIM = dict(d0=2, d1=1000, n=950, n1=475, C=16.0, t=0.2, pilot_kind="lasso",
                 sparsity=2, lasso_penalty="universal")

PRESETS: dict[str, ExperimentConfig] = {
    "fig1": ExperimentConfig(
        GenConfig(**_HIGH_DIM), reps=1000,
        estimators=("unweighted-z", "pl-direction"), name="fig1",
    ),
    "fig2": ExperimentConfig(
        GenConfig(d0=2, d1=5, n=500, n1=125, C=2.0, t=0.2), reps=1000,
        estimators=("adaptz-pl", "pl-direction", "unweighted-z", "ols"), name="fig2",
    ),
    "fig3": ExperimentConfig(
        GenConfig(**_HIGH_DIM), reps=1000,
        estimators=("pl-direction", "adaptz-pl", "unweighted-z"), name="fig3",
    ),
    "fig4": ExperimentConfig(
        GenConfig(d0=2, d1=20, n=2000, n1=1000, C=8.0, t=0.1, link=LinkKind.logistic(),
                  pilot_kind="mle", ar_gamma=0.5),
        reps=1000, estimators=("glm-direction", "adaptz-glm", "mle"), name="fig4",
    ),
}


def preset(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise UsageError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


# --- config files ----------------------------------------------------------

_GEN_KEYS = {
    "d0": int, "d1": int, "n": int, "n1": int, "C": float, "t": float,
    "ar_gamma": float, "lasso_nu": float, "lasso_s_guess": int,
}


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _opt_int(text: str) -> int | None:
    return None if text.strip().lower() in ("", "none", "auto") else int(text)


def apply_overrides(cfg: ExperimentConfig, items: dict[str, str]) -> ExperimentConfig:
    """Apply string-valued ``key = value`` settings to a config."""
    gen_kw: dict = {}
    exp_kw: dict = {}
    for raw_key, raw in items.items():
        key = raw_key.strip().replace("-", "_")
        val = str(raw).strip()
        try:
            if key in _GEN_KEYS or key.lower() in ("c",):
                k = "C" if key.lower() == "c" else key
                gen_kw[k] = _GEN_KEYS[k](val)
            elif key == "link":
                gen_kw["link"] = LinkKind.logistic() if val == "logistic" else LinkKind.identity()
            elif key == "noise_sd":
                gen_kw["link"] = LinkKind.identity(float(val))
            elif key == "pilot_kind":
                gen_kw["pilot_kind"] = val
            elif key in ("sparsity", "refit_every"):
                gen_kw[key] = _opt_int(val)
            elif key == "lasso_b":
                gen_kw["lasso_B"] = None if val.lower() in ("", "none", "auto") else float(val)
            elif key == "lasso_penalty":
                gen_kw[key] = val if val in ("theory", "universal") else float(val)
            elif key == "theta_star":
                gen_kw[key] = _floats(val) or None
            elif key == "beta_star":
                gen_kw[key] = _floats(val) or None
            elif key == "reps":
                exp_kw["reps"] = int(val)
            elif key in ("seed", "base_seed"):
                exp_kw["base_seed"] = int(val)
            elif key == "workers":
                exp_kw["workers"] = int(val)
            elif key == "estimators":
                exp_kw["estimators"] = tuple(v.strip() for v in val.split(",") if v.strip())
            elif key == "u":
                exp_kw["u"] = _floats(val)
            elif key == "levels":
                exp_kw["levels"] = _floats(val)
            elif key in ("output_dir", "out"):
                exp_kw["output_dir"] = val
            elif key == "pilot":
                exp_kw["pilot"] = val or None
            elif key == "sigma":
                exp_kw["sigma"] = val if val == "plugin" else float(val)
            elif key == "svg":
                exp_kw["svg"] = val.lower() in ("1", "true", "yes", "on")
            elif key == "name":
                exp_kw["name"] = val
            elif key == "preset":
                continue
            else:
                raise ConfigurationError(f"unknown setting {raw_key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(f"bad value for {raw_key!r}: {raw!r}") from None
    gen = replace(cfg.gen, **gen_kw) if gen_kw else cfg.gen
    return replace(cfg, gen=gen, **exp_kw)


def load_config(path: str | Path, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    """Read an INI file with an ``[experiment]`` section.

    A ``preset`` key selects the starting point; other keys override it,
    and ``overrides`` (from the command line) win over the file.
    """
    parser = configparser.ConfigParser()
    parser.optionxform = str
    if not parser.read(path):
        raise ConfigurationError(f"cannot read config file {path}")
    if "experiment" not in parser:
        raise ConfigurationError(f"{path}: missing [experiment] section")
    items = dict(parser["experiment"])
    base = preset(items["preset"]) if "preset" in items else ExperimentConfig()
    cfg = apply_overrides(base, items)
    return apply_overrides(cfg, overrides or {})


def env_workers(default: int) -> int:
    raw = os.environ.get("ADAPTZ_THREADS")
    if raw is None or raw.strip() == "":
        return default
    try:
        val = int(raw)
    except ValueError:
        raise ConfigurationError(f"ADAPTZ_THREADS must be an integer, got {raw!r}") from None
    if val < 1:
        raise ConfigurationError("ADAPTZ_THREADS must be >= 1")
    return val


# --- one replication ---------------------------------------------------------


@dataclass(frozen=True)
class EstimateRow:
    """One estimator's output on one replication."""

    rep: int
    estimator: str
    estimate: float
    se: float
    std_error: float
    chi2: float | None
    iterations: int
    converged: bool


@dataclass(frozen=True)
class ReplicationResult:
    rep: int
    rows: tuple[EstimateRow, ...]
    failures: dict
    pilot_converged: bool
    pilot_fallbacks: int
    seconds: float


def fit_fold1_pilot(cfg: ExperimentConfig, dataset: Dataset) -> PilotFit:
    fold = dataset.fold(1)
    method = cfg.pilot_method
    lam = None
    if method in ("lasso", "glm-lasso"):
        lam = pilot_penalty(cfg.gen, fold.n, fold.z)
    return fit_pilot(fold, method, link=cfg.gen.link, lam=lam)


def _sigma(cfg: ExperimentConfig, dataset: Dataset) -> float:
    if cfg.sigma == "plugin":
        return sigma_plugin(dataset)
    if cfg.sigma is None:
        return cfg.gen.link.noise_sd
    return float(cfg.sigma)


def estimate_one(
    name: str,
    dataset: Dataset,
    pilot: PilotFit,
    u: NDArray[np.float64],
    link: LinkKind,
    sigma: float,
    theta_star: NDArray[np.float64] | None = None,
) -> dict:
    """Run one estimator; returns estimate, standard error and diagnostics.

    Non-convergence raises :class:`AdaptzError` so callers can count it as
    a failure.
    """
    chi = None
    iters, conv = 0, True
    theta = None
    if name == "adaptz-pl":
        sol = adaptz_pl(dataset, pilot, sigma)
        est, se = float(u @ sol.theta), vector_direction_se(sol, u)
        theta = sol.theta
        if theta_star is not None:
            chi = chi2_region_stat(sol, theta_star)
    elif name == "pl-direction":
        sol = pl_direction(dataset, u, pilot)
        est, se = sol.theta_u, dir_standard_error(sol, sigma)
    elif name == "unweighted-z":
        sol = unweighted_z(dataset, pilot, sigma)
        est, se = float(u @ sol.theta), vector_direction_se(sol, u)
        theta = sol.theta
    elif name == "adaptz-glm":
        sol = adaptz_glm(dataset, pilot, link)
        iters, conv = sol.newton_iters, sol.converged
        if not conv:
            raise AdaptzError(f"GLM Newton did not converge in {iters} iterations")
        est, se = float(u @ sol.theta), vector_direction_se(sol, u)
        theta = sol.theta
        if theta_star is not None:
            chi = chi2_region_stat(sol, theta_star)
    elif name == "glm-direction":
        sol = glm_direction(dataset, u, pilot, link)
        iters, conv = sol.iterations, sol.converged
        if not conv:
            raise AdaptzError("GLM direction root finding did not converge")
        if not sol.scale_bar > 0:
            raise AdaptzError(f"non-positive variance scale {sol.scale_bar!r}")
        est, se = sol.theta_u, dir_standard_error(sol, 1.0)
    elif name == "ols":
        th, cov = ols_full(dataset, sigma)
        est, se = float(u @ th), math.sqrt(float(u @ cov @ u))
        theta = th
    elif name == "mle":
        th, cov, ok = mle_full(dataset)
        if not ok:
            raise AdaptzError("full-sample MLE did not converge")
        est, se = float(u @ th), math.sqrt(float(u @ cov @ u))
        theta = th
    else:
        raise UsageError(f"unknown estimator {name!r}")
    if not (math.isfinite(est) and math.isfinite(se) and se > 0):
        raise AdaptzError(f"{name}: non-finite estimate or standard error")
    return {"estimate": est, "se": se, "chi2": chi, "iterations": iters,
            "converged": conv, "theta": theta}


def run_replication(cfg: ExperimentConfig, truth: TrueModel, rep: int) -> ReplicationResult:
    start = time.perf_counter()
    dataset, _ = generate(cfg.gen, cfg.base_seed + rep, truth)
    u = cfg.direction
    target = float(u @ truth.theta_star)
    rows: list[EstimateRow] = []
    failures: dict[str, str] = {}
    try:
        pilot = fit_fold1_pilot(cfg, dataset)
    except (AdaptzError, np.linalg.LinAlgError) as exc:
        return ReplicationResult(rep, (), {e: f"pilot: {exc}" for e in cfg.estimators},
                                 False, dataset.meta.get("pilot_fallbacks", 0),
                                 time.perf_counter() - start)
    sigma = _sigma(cfg, dataset)
    for name in cfg.estimators:
        try:
            out = estimate_one(name, dataset, pilot, u, cfg.gen.link, sigma, truth.theta_star)
        except (AdaptzError, np.linalg.LinAlgError) as exc:
            failures[name] = str(exc)
            continue
        rows.append(EstimateRow(
            rep, name, out["estimate"], out["se"], (out["estimate"] - target) / out["se"],
            out["chi2"], out["iterations"], out["converged"],
        ))
    return ReplicationResult(rep, tuple(rows), failures, pilot.converged,
                             dataset.meta.get("pilot_fallbacks", 0),
                             time.perf_counter() - start)


def _worker(args: tuple[ExperimentConfig, TrueModel, int]) -> ReplicationResult:
    cfg, truth, rep = args
    return run_replication(cfg, truth, rep)


# --- aggregation -------------------------------------------------------------


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    truth: TrueModel
    coverage: dict[str, CoverageReport]
    rows: dict[str, list[EstimateRow]]
    failures: dict[str, int]
    failure_messages: dict[str, list[str]]
    pilot_nonconverged: int
    generator_fallbacks: int
    seconds_total: float
    seconds_replications: float

    @property
    def target(self) -> float:
        return float(self.config.direction @ self.truth.theta_star)

    def failure_rate(self, name: str) -> float:
        return self.failures.get(name, 0) / self.config.reps

    def unreliable(self, name: str) -> bool:
        return self.failure_rate(name) > UNRELIABLE_FRACTION

    def chi2_rejection(self, name: str) -> float | None:
        vals = [r.chi2 for r in self.rows.get(name, []) if r.chi2 is not None]
        if not vals:
            return None
        q = float(chi2.ppf(CHI2_LEVEL, self.config.gen.d0))
        return sum(v > q for v in vals) / len(vals)

    def convergence_rate(self, name: str) -> float:
        ok = sum(r.converged for r in self.rows.get(name, []))
        return ok / self.config.reps

    def summary(self) -> dict:
        out = {}
        for name, rep in self.coverage.items():
            out[name] = {
                "replications_used": rep.count,
                "failures": self.failures.get(name, 0),
                "unreliable": self.unreliable(name),
                "convergence_rate": self.convergence_rate(name),
                "z_mean": rep.z_mean,
                "z_sd": rep.z_sd,
                "ks": rep.ks,
                "chi2_rejection": self.chi2_rejection(name),
            }
        for name in self.config.estimators:
            if name not in out:
                out[name] = {"replications_used": 0, "failures": self.failures.get(name, 0),
                             "unreliable": True}
        return out


def run_experiment(
    cfg: ExperimentConfig, progress: Callable[[int], None] | None = None
) -> ExperimentReport:
    """Run all replications and aggregate by replication index."""
    start = time.perf_counter()
    workers = env_workers(cfg.workers)
    truth = resolve_truth(cfg.gen, cfg.base_seed)
    jobs = [(cfg, truth, r) for r in range(cfg.reps)]
    results: list[ReplicationResult] = []
    if workers == 1:
        for job in jobs:
            results.append(_worker(job))
            if progress:
                progress(len(results))
    else:
        chunk = max(1, cfg.reps // (8 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for res in pool.map(_worker, jobs, chunksize=chunk):
                results.append(res)
                if progress:
                    progress(len(results))
    results.sort(key=lambda r: r.rep)
    return aggregate(cfg, truth, results, time.perf_counter() - start)


def aggregate(
    cfg: ExperimentConfig, truth: TrueModel, results: Sequence[ReplicationResult], seconds: float
) -> ExperimentReport:
    target = float(cfg.direction @ truth.theta_star)
    rows: dict[str, list[EstimateRow]] = {e: [] for e in cfg.estimators}
    failures = {e: 0 for e in cfg.estimators}
    messages: dict[str, list[str]] = {e: [] for e in cfg.estimators}
    for res in sorted(results, key=lambda r: r.rep):
        for row in res.rows:
            rows[row.estimator].append(row)
        for name, msg in res.failures.items():
            failures[name] += 1
            if len(messages[name]) < 10:
                messages[name].append(f"rep {res.rep}: {msg}")
    coverage = {}
    for name, rs in rows.items():
        if rs:
            coverage[name] = coverage_report(
                target, [r.estimate for r in rs], [r.se for r in rs], cfg.levels
            )
    return ExperimentReport(
        cfg, truth, coverage, rows, failures, messages,
        sum(not r.pilot_converged for r in results),
        sum(r.pilot_fallbacks for r in results),
        seconds, math.fsum(r.seconds for r in results),
    )


# --- output ----------------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def write_outputs(report: ExperimentReport, out_dir: str | Path) -> list[Path]:
    """Write coverage/stderr CSVs per estimator, ``report.json`` and the SVG."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")
    written = []
    cols = ["level", "cov_upper", "cov_lower", "cov_two", "se_upper", "se_lower", "se_two",
            "mean_width"]
    for name, rep in report.coverage.items():
        path = out / f"coverage_{name}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for row in rep.rows():
                w.writerow([_fmt(row[c]) for c in cols])
        written.append(path)
        path = out / f"stderrs_{name}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rep", "estimate", "se", "std_error"])
            for r in report.rows[name]:
                w.writerow([r.rep, _fmt(r.estimate), _fmt(r.se), _fmt(r.std_error)])
        written.append(path)
    doc = {
        "config": report.config.to_dict(),
        "theta_star": report.truth.theta_star.tolist(),
        "beta_star": report.truth.beta_star.tolist(),
        "target": report.target,
        "estimators": report.summary(),
        "failure_messages": report.failure_messages,
        "pilot_nonconverged": report.pilot_nonconverged,
        "generator_pilot_fallbacks": report.generator_fallbacks,
        "runtime_seconds": {
            "total": report.seconds_total,
            "replications_cpu": report.seconds_replications,
        },
    }
    path = out / "report.json"
    path.write_text(json.dumps(_finite(doc), indent=2, sort_keys=True, allow_nan=False,
                               default=_json_default) + "\n")
    written.append(path)
    if report.config.svg and report.coverage:
        path = out / "coverage.svg"
        path.write_text(coverage_svg(report.coverage))
        written.append(path)
    return written


def _finite(obj):
    """Replace NaN and infinities by ``None`` so the report is strict JSON."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    raise TypeError(type(obj).__name__)


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def coverage_svg(coverage: dict[str, CoverageReport], width: int = 640, height: int = 480) -> str:
    """Two-sided coverage against nominal level, with the ``y = x`` baseline."""
    levels = [lv for rep in coverage.values() for lv in rep.levels]
    lo = min(min(levels), min(min(r.cov_two) for r in coverage.values()))
    lo = math.floor(lo * 20) / 20
    hi = 1.0
    m = 60

    def sx(v):
        return m + (v - lo) / (hi - lo) * (width - 2 * m)

    def sy(v):
        return height - m - (v - lo) / (hi - lo) * (height - 2 * m)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{sx(lo):.2f}" y1="{sy(lo):.2f}" x2="{sx(hi):.2f}" y2="{sy(hi):.2f}" '
        'stroke="#888" stroke-dasharray="6,4"/>',
        f'<line x1="{m}" y1="{height - m}" x2="{width - m}" y2="{height - m}" stroke="black"/>',
        f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="{height - 15}" text-anchor="middle" '
        'font-family="sans-serif" font-size="14">nominal level</text>',
        f'<text x="18" y="{height / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14" transform="rotate(-90 18 {height / 2:.0f})">two-sided coverage</text>',
    ]
    tick = lo
    while tick <= hi + 1e-9:
        parts.append(f'<text x="{sx(tick):.2f}" y="{height - m + 18}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="11">{tick:.2f}</text>')
        parts.append(f'<text x="{m - 6}" y="{sy(tick) + 4:.2f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{tick:.2f}</text>')
        tick = round(tick + 0.05, 10)
    for k, (name, rep) in enumerate(coverage.items()):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{sx(a):.2f},{sy(c):.2f}" for a, c in zip(rep.levels, rep.cov_two))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        for a, c in zip(rep.levels, rep.cov_two):
            parts.append(f'<circle cx="{sx(a):.2f}" cy="{sy(c):.2f}" r="3" fill="{color}"/>')
        parts.append(f'<text x="{m + 10}" y="{m + 16 * (k + 1)}" fill="{color}" '
                     f'font-family="sans-serif" font-size="12">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
