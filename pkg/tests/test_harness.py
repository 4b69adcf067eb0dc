import json
import math
from dataclasses import replace

import numpy as np
import pytest

from adaptz.datagen import GenConfig
from adaptz.errors import ConfigurationError, UsageError
from adaptz.harness import (
    PRESETS,
    ExperimentConfig,
    ReplicationResult,
    aggregate,
    apply_overrides,
    env_workers,
    load_config,
    preset,
    resolve_truth,
    run_experiment,
    run_replication,
    write_outputs,
)
from adaptz.model import LinkKind

SMALL = ExperimentConfig(GenConfig(d0=2, d1=3, n=120, n1=40), reps=12,
                         estimators=("adaptz-pl", "pl-direction", "unweighted-z", "ols"))


def test_presets():
    assert set(PRESETS) == {"fig1", "fig2", "fig3", "fig4"}
    fig2 = preset("fig2")
    assert (fig2.gen.d0, fig2.gen.d1, fig2.gen.n, fig2.gen.n1) == (2, 5, 500, 125)
    fig1 = preset("fig1")
    assert fig1.gen.refit_cadence == 25 and fig1.gen.sparsity == 2
    fig4 = preset("fig4")
    assert not fig4.gen.link.is_identity and fig4.pilot_method == "mle"
    with pytest.raises(UsageError):
        preset("fig9")


def test_config_validation():
    with pytest.raises(ConfigurationError):
        ExperimentConfig(reps=0)
    with pytest.raises(ConfigurationError):
        ExperimentConfig(estimators=("nope",))
    with pytest.raises(ConfigurationError):
        ExperimentConfig(estimators=("mle",))
    with pytest.raises(ConfigurationError):
        ExperimentConfig(gen=GenConfig(link=LinkKind.logistic(), pilot_kind="mle"),
                         estimators=("ols",))
    with pytest.raises(ConfigurationError):
        ExperimentConfig(u=(1.0, 1.0))
    with pytest.raises(ConfigurationError):
        ExperimentConfig(levels=(0.9, 0.8))


def test_overrides():
    cfg = apply_overrides(preset("fig2"), {"reps": "7", "seed": "3", "n": "300", "C": "4",
                                           "u": "0.6,0.8", "sigma": "plugin", "svg": "yes"})
    assert cfg.reps == 7 and cfg.base_seed == 3 and cfg.gen.n == 300 and cfg.gen.C == 4.0
    assert cfg.direction.tolist() == [0.6, 0.8]
    assert cfg.sigma == "plugin" and cfg.svg
    with pytest.raises(ConfigurationError):
        apply_overrides(cfg, {"bogus": "1"})
    with pytest.raises(ConfigurationError):
        apply_overrides(cfg, {"reps": "many"})


def test_load_config(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text("[experiment]\npreset = fig2\nreps = 9\nrefit_every = 5\n")
    cfg = load_config(path, {"reps": "11"})
    assert cfg.reps == 11 and cfg.gen.refit_cadence == 5 and cfg.gen.d1 == 5
    bad = tmp_path / "bad.ini"
    bad.write_text("[other]\nx = 1\n")
    with pytest.raises(ConfigurationError):
        load_config(bad)
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "missing.ini")


def test_env_workers(monkeypatch):
    monkeypatch.delenv("ADAPTZ_THREADS", raising=False)
    assert env_workers(3) == 3
    monkeypatch.setenv("ADAPTZ_THREADS", "2")
    assert env_workers(3) == 2
    monkeypatch.setenv("ADAPTZ_THREADS", "zero")
    with pytest.raises(ConfigurationError):
        env_workers(1)


def test_replication_rows():
    truth = resolve_truth(SMALL.gen, 0)
    res = run_replication(SMALL, truth, 2)
    assert res.rep == 2 and not res.failures
    names = [r.estimator for r in res.rows]
    assert names == list(SMALL.estimators)
    for r in res.rows:
        assert r.std_error == pytest.approx((r.estimate - 2.0) / r.se)
    chi = {r.estimator: r.chi2 for r in res.rows}
    assert chi["adaptz-pl"] is not None and chi["ols"] is None


def test_experiment_outputs_and_determinism(tmp_path, monkeypatch):
    monkeypatch.delenv("ADAPTZ_THREADS", raising=False)
    cfg = replace(SMALL, svg=True)
    one = run_experiment(cfg)
    paths = write_outputs(one, tmp_path / "a")
    names = {p.name for p in paths}
    assert {"report.json", "coverage.svg", "coverage_adaptz-pl.csv",
            "stderrs_ols.csv"} <= names
    rep = one.coverage["adaptz-pl"]
    for c, se in zip(rep.cov_two, rep.se_two):
        assert se == pytest.approx(math.sqrt(c * (1 - c) / 12))
    doc = json.loads((tmp_path / "a" / "report.json").read_text())
    assert doc["target"] == 2.0 and doc["config"]["reps"] == 12
    assert doc["estimators"]["adaptz-pl"]["replications_used"] == 12
    assert (tmp_path / "a" / "coverage.svg").read_text().startswith("<svg")
    # the same experiment on three workers writes identical CSVs
    many = run_experiment(replace(cfg, workers=3))
    write_outputs(many, tmp_path / "b")
    for name in names - {"report.json", "coverage.svg"}:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_failure_accounting():
    cfg = replace(SMALL, reps=3)
    truth = resolve_truth(cfg.gen, 0)
    ok = [run_replication(cfg, truth, r) for r in range(2)]
    broken = ReplicationResult(2, (), {"ols": "boom", "adaptz-pl": "boom"}, True, 0, 0.0)
    report = aggregate(cfg, truth, ok + [broken], 0.0)
    assert report.failures["ols"] == 1 and report.failure_rate("ols") == pytest.approx(1 / 3)
    assert report.unreliable("ols") and not report.unreliable("pl-direction")
    assert report.coverage["ols"].count == 2
    assert report.failure_messages["ols"] == ["rep 2: boom"]
    summary = report.summary()
    assert summary["pl-direction"]["replications_used"] == 2
    assert summary["pl-direction"]["failures"] == 0


def test_logistic_replication():
    cfg = ExperimentConfig(
        GenConfig(d0=2, d1=3, n=300, n1=150, C=8.0, t=0.1, link=LinkKind.logistic(),
                  pilot_kind="mle"),
        reps=2, estimators=("glm-direction", "adaptz-glm", "mle"))
    truth = resolve_truth(cfg.gen, 0)
    res = run_replication(cfg, truth, 0)
    done = {r.estimator for r in res.rows} | set(res.failures)
    assert done == {"glm-direction", "adaptz-glm", "mle"}
    assert all(np.isfinite(r.estimate) for r in res.rows)
