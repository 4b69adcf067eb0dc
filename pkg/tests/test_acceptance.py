"""End-to-end acceptance checks.

Each test prints one ``PASS``/``FAIL`` line with the measured value and the
tolerance, then asserts.  Monte Carlo runs go through ``run_experiment``
with fixed base seeds.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from adaptz.checks import run_identity_checks
from adaptz.estimators import adaptz_glm, adaptz_pl, glm_direction, pl_direction
from adaptz.glmweights import glm_cov_inverse_woodbury, glm_weights
from adaptz.harness import preset, run_experiment, write_outputs
from adaptz.model import LinkKind, SelectionProbs
from adaptz.pilot import lasso_fit, lasso_objective, logistic_grad, logistic_mle, ols_fit
from adaptz.probvec import cov_inv_sqrt

from conftest import ACCEPTANCE_LINES, gauss_jordan_inverse, make_dataset, random_full_probs
from test_pilot import _fold, proximal_gradient_oracle

pytestmark = pytest.mark.slow

LOGIT = LinkKind.logistic()
IDENT = LinkKind.identity()


def report(capsys, number, passed, text):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {text}"
    ACCEPTANCE_LINES.append(line)
    with capsys.disabled():
        print("\n" + line)
    return passed


# --- shared Monte Carlo runs -----------------------------------------------


@pytest.fixture(scope="module")
def fig2_runs(tmp_path_factory, monkeypatch_module):
    monkeypatch_module.delenv("ADAPTZ_THREADS", raising=False)
    cfg = replace(preset("fig2"), reps=1000, base_seed=0)
    out = {}
    for workers in (1, 3):
        start = time.perf_counter()
        rep = run_experiment(replace(cfg, workers=workers))
        path = tmp_path_factory.mktemp(f"fig2_w{workers}")
        write_outputs(rep, path)
        out[workers] = (rep, path, time.perf_counter() - start)
    return out


@pytest.fixture(scope="module")
def monkeypatch_module():
    mp = pytest.MonkeyPatch()
    yield mp
    mp.undo()


# --- 1: exact identities ---------------------------------------------------


def test_criterion_1_identity_suite(capsys):
    start = time.perf_counter()
    results = run_identity_checks(instances=1000, seed=0, max_d0=10)
    secs = time.perf_counter() - start
    ok = all(r.passed for r in results) and secs < 5.0
    worst = "; ".join(f"{r.name} {r.worst:.1e}" for r in results)
    assert report(capsys, 1, ok, f"1000 instances in {secs:.2f}s (< 5s); {worst}")


# --- 2: identity-link reductions -------------------------------------------


def test_criterion_2_reduction_suite(capsys):
    rng = np.random.default_rng(2)
    worst_est, worst_w = 0.0, 0.0
    for _ in range(100):
        d0 = int(rng.integers(1, 5))
        ds = make_dataset(rng, 120, d0, 3, rng.normal(size=d0), rng.normal(size=3), noise=1.0)
        pilot = ols_fit(ds.fold(1))
        u = rng.normal(size=d0)
        u /= np.linalg.norm(u)
        worst_est = max(
            worst_est,
            float(np.max(np.abs(adaptz_glm(ds, pilot, IDENT).theta - adaptz_pl(ds, pilot).theta))),
            abs(glm_direction(ds, u, pilot, IDENT).theta_u - pl_direction(ds, u, pilot).theta_u),
        )
        sp = SelectionProbs.from_full(random_full_probs(rng, d0, 0.05))
        w = glm_weights(sp, rng.normal(size=d0), float(rng.normal()), IDENT)
        worst_w = max(worst_w, float(np.max(np.abs(w.m - sp.p))),
                      float(np.max(np.abs(w.omega - cov_inv_sqrt(sp)))))
    ok = worst_est <= 1e-8 and worst_w <= 1e-10
    assert report(capsys, 2, ok, f"100 instances: GLM vs PL estimates {worst_est:.1e} (tol 1e-8), "
                                 f"weights vs (pi, Sigma^-1/2) {worst_w:.1e} (tol 1e-10)")


# --- 3: solver oracles -----------------------------------------------------


def test_criterion_3_oracle_suite(capsys):
    rng = np.random.default_rng(3)
    gap, kkt, grad, wood = -math.inf, 0.0, 0.0, 0.0
    for _ in range(50):
        fold = _fold(rng, 20, 2, 6, noise=1.0)
        q = fold.design()
        lam = float(rng.uniform(0.02, 0.4))
        fit = lasso_fit(fold, lam)
        oracle = proximal_gradient_oracle(q, fold.y, lam)
        gap = max(gap, lasso_objective(q, fold.y, fit.coef, lam)
                  - lasso_objective(q, fold.y, oracle, lam))
        corr = q.T @ (fold.y - q @ fit.coef) / fold.n
        viol = np.maximum(np.abs(corr) - lam, 0.0)
        active = fit.coef != 0
        viol[active] = np.abs(corr[active] - lam * np.sign(fit.coef[active]))
        kkt = max(kkt, float(viol.max()))

        lfold = _fold(rng, 200, 2, 3, y=np.zeros(200))
        eta = lfold.design() @ rng.normal(scale=0.5, size=5)
        y = (rng.random(200) < 1 / (1 + np.exp(-eta))).astype(float)
        lfold = type(lfold)(lfold.arms, lfold.z, y, lfold.probs)
        mle = logistic_mle(lfold)
        if mle.converged:
            grad = max(grad, float(np.max(np.abs(logistic_grad(lfold.design(), y, mle.coef)))))

        d0 = int(rng.integers(1, 9))
        sp = SelectionProbs.from_full(random_full_probs(rng, d0, 0.05))
        theta, h = rng.normal(size=d0), float(rng.normal())
        w = glm_weights(sp, theta, h, LOGIT)
        gj = gauss_jordan_inverse(w.sigma_glm)
        wb = glm_cov_inverse_woodbury(sp, w.m, theta, h, LOGIT)
        wood = max(wood, float(np.max(np.abs(wb - gj)) / max(1.0, np.max(np.abs(gj)))))
    ok = gap <= 1e-8 and kkt <= 1e-8 and grad < 1e-8 and wood <= 1e-8
    assert report(capsys, 3, ok,
                  f"50 instances: lasso objective minus oracle {gap:.1e} (<= 1e-8), KKT {kkt:.1e} "
                  f"(1e-8), MLE gradient {grad:.1e} (< 1e-8), Woodbury vs Gauss-Jordan {wood:.1e} "
                  f"(1e-8, relative to max(1, max|inverse|))")


# --- 4: fig2 normality and coverage ----------------------------------------


def test_criterion_4_fig2_coverage(capsys, fig2_runs):
    rep, _, secs = fig2_runs[1]
    cov_dir = rep.coverage["pl-direction"].at(0.95)["two"]
    ks = rep.coverage["adaptz-pl"].ks
    ks_dir = rep.coverage["pl-direction"].ks
    lower_unw = rep.coverage["unweighted-z"].at(0.95)["lower"]
    lower_ad = rep.coverage["adaptz-pl"].at(0.95)["lower"]
    lower_dir = rep.coverage["pl-direction"].at(0.95)["lower"]
    a = 0.925 <= cov_dir <= 0.975
    b = ks < 0.07
    c = lower_ad - lower_unw >= 0.005
    assert report(capsys, 4, a and b and c,
                  f"fig2 T=1000 in {secs:.0f}s: (a) PL-direction 95% two-sided coverage {cov_dir:.3f} "
                  f"in [0.925, 0.975] {'ok' if a else 'MISS'}; (b) AdapTZ-PL KS {ks:.4f} < 0.07 "
                  f"{'ok' if b else 'MISS'} (PL-direction KS {ks_dir:.4f}); (c) lower 95% coverage "
                  f"unweighted {lower_unw:.3f} vs AdapTZ-PL {lower_ad:.3f} (gap >= 0.005 "
                  f"{'ok' if c else 'MISS'}; PL-direction {lower_dir:.3f})")


# --- 5: bias of the unweighted estimator ------------------------------------


def test_criterion_5_scaled_fig1_bias(capsys, monkeypatch):
    monkeypatch.delenv("ADAPTZ_THREADS", raising=False)
    base = preset("fig1")
    cfg = replace(base, gen=replace(base.gen, d1=200, n=400, n1=200, refit_every=25),
                  reps=200, base_seed=0, estimators=("unweighted-z", "pl-direction"))
    start = time.perf_counter()
    rep = run_experiment(cfg)
    secs = time.perf_counter() - start
    z = np.array(rep.coverage["unweighted-z"].std_errors)
    t_stat = float(z.mean() / (z.std(ddof=1) / math.sqrt(z.size)))
    ok = z.mean() < 0 and t_stat < -2 and secs < 600
    assert report(capsys, 5, ok,
                  f"scaled fig1 T=200 in {secs:.0f}s: unweighted-z standardized error mean "
                  f"{z.mean():.4f}, SD {z.std(ddof=1):.3f}, t = {t_stat:.2f} (need < -2)")


# --- 6: logistic coverage --------------------------------------------------


def test_criterion_6_scaled_fig4(capsys, monkeypatch):
    monkeypatch.delenv("ADAPTZ_THREADS", raising=False)
    base = preset("fig4")
    cfg = replace(base, gen=replace(base.gen, n=1000, n1=500), reps=300, base_seed=0,
                  estimators=("glm-direction", "adaptz-glm"))
    start = time.perf_counter()
    rep = run_experiment(cfg)
    secs = time.perf_counter() - start
    cov = rep.coverage["glm-direction"].at(0.9)["two"]
    conv = rep.convergence_rate("adaptz-glm")
    conv_dir = rep.convergence_rate("glm-direction")
    ok = 0.85 <= cov <= 0.95 and conv >= 0.99 and secs < 600
    assert report(capsys, 6, ok,
                  f"scaled fig4 T=300 in {secs:.0f}s: GLM-direction 90% two-sided coverage "
                  f"{cov:.3f} in [0.85, 0.95]; Newton convergence AdapTZ-GLM {conv:.3f}, "
                  f"GLM-direction {conv_dir:.3f} (>= 0.99)")


# --- 7: chi-square region ----------------------------------------------------


def test_criterion_7_chi2_region(capsys, fig2_runs):
    rep = fig2_runs[1][0]
    rate = rep.chi2_rejection("adaptz-pl")
    ok = 0.025 <= rate <= 0.075
    assert report(capsys, 7, ok, f"fig2 T=1000 chi2_2 95% rejection rate {rate:.3f} "
                                 f"in [0.025, 0.075]")


# --- 8: determinism across worker counts -----------------------------------


def test_criterion_8_determinism(capsys, fig2_runs):
    (_, p1, _), (_, p3, _) = fig2_runs[1], fig2_runs[3]
    names = sorted(p.name for p in p1.glob("*.csv"))
    same = [n for n in names if (p1 / n).read_bytes() == (p3 / n).read_bytes()]
    ok = bool(names) and len(same) == len(names) and names == sorted(p.name for p in p3.glob("*.csv"))
    assert report(capsys, 8, ok, f"fig2 with 1 and 3 workers: {len(same)}/{len(names)} CSVs "
                                 f"byte-identical")
