import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptz.errors import ConfigurationError, UsageError
from adaptz.model import (
    Dataset,
    LinkKind,
    Sample,
    SelectionProbs,
    TrueModel,
    covariate_vector,
    link_eval,
    read_dataset_csv,
    write_dataset_csv,
)

from conftest import make_dataset


def test_link_eval_logistic_at_zero():
    assert link_eval(LinkKind.logistic(), 0.0) == (0.5, 0.25, 0.25)


def test_link_eval_identity():
    assert link_eval(LinkKind.identity(1.0), 2.0) == (2.0, 1.0, 1.0)
    g, gp, var = link_eval(LinkKind.identity(2.0), -1.5)
    assert (g, gp, var) == (-1.5, 1.0, 4.0)


def test_link_eval_logistic_log3():
    g, gp, var = link_eval(LinkKind.logistic(), math.log(3.0))
    assert g == pytest.approx(0.75, abs=1e-15)
    assert gp == pytest.approx(0.1875, abs=1e-15)
    assert var == pytest.approx(0.1875, abs=1e-15)


def test_logistic_is_stable_for_huge_arguments():
    link = LinkKind.logistic()
    mu = link.mean(np.array([-800.0, 800.0]))
    assert np.all(np.isfinite(mu))
    assert mu[0] == 0.0 and mu[1] == 1.0
    assert np.all(np.isfinite(link.cumulant(np.array([-800.0, 800.0]))))


@given(st.floats(-700, 700))
def test_logistic_derivative_identity(eta):
    link = LinkKind.logistic()
    g = float(link.mean(np.array(eta)))
    gp = float(link.derivative(np.array(eta)))
    assert 0.0 <= g <= 1.0
    if gp > 0:
        assert abs(gp - g * (1 - g)) <= 1e-14 * gp + 1e-300


def test_covariate_vector_examples():
    assert covariate_vector(0, 3).tolist() == [0, 0, 0]
    assert covariate_vector(2, 3).tolist() == [0, 1, 0]
    assert covariate_vector(1, 1).tolist() == [1]
    with pytest.raises(ConfigurationError):
        covariate_vector(4, 3)


def test_covariate_vector_injective():
    vecs = {tuple(covariate_vector(k, 4)) for k in range(5)}
    assert len(vecs) == 5
    assert all(sum(v) <= 1 for v in vecs)


def test_selection_probs_validation():
    SelectionProbs(np.array([0.3, 0.3]), 0.4)
    with pytest.raises(ConfigurationError):
        SelectionProbs(np.array([0.3, 0.3]), 0.5)
    with pytest.raises(ConfigurationError):
        SelectionProbs(np.array([0.0, 0.6]), 0.4)
    sp = SelectionProbs.from_full([0.2, 0.5, 0.3])
    assert sp.p0 == 0.2 and sp.d0 == 2
    assert sp.full.tolist() == [0.2, 0.5, 0.3]


def test_dataset_folds_and_immutability(rng):
    ds = make_dataset(rng, 40, 2, 3, [1.0, -1.0], [0.5, 0.0, 2.0])
    assert (ds.n, ds.d0, ds.d1, ds.n1, ds.n2) == (40, 2, 3, 20, 20)
    f1, f2 = ds.fold(1), ds.fold(2)
    assert f1.n + f2.n == ds.n
    assert np.array_equal(f2.y, ds.y[20:])
    with pytest.raises(ValueError):
        ds.y[0] = 3.0
    with pytest.raises(UsageError):
        ds.fold(3)
    with pytest.raises(ConfigurationError):
        ds.with_split(40)


def test_dataset_samples_round_trip(rng):
    ds = make_dataset(rng, 12, 2, 2, [1.0, 2.0], [0.1, 0.2])
    samples = list(ds)
    assert isinstance(samples[0], Sample)
    back = Dataset.from_samples(samples, ds.split_at)
    assert np.array_equal(back.y, ds.y)
    assert np.array_equal(back.probs, ds.probs)
    assert np.array_equal(samples[3].x(), ds.x()[3])


def test_true_model_rejects_nan():
    with pytest.raises(ConfigurationError):
        TrueModel(np.array([np.nan]), np.zeros(2), LinkKind.identity())


def test_csv_round_trip_is_exact(rng, tmp_path):
    ds = make_dataset(rng, 30, 3, 4, [1.0, -2.0, 0.5], rng.normal(size=4), noise=1.0)
    path = tmp_path / "d.csv"
    write_dataset_csv(ds, path)
    back = read_dataset_csv(path, split_at=ds.split_at)
    assert np.array_equal(back.arms, ds.arms)
    assert np.array_equal(back.y, ds.y)
    assert np.array_equal(back.z, ds.z)
    assert np.array_equal(back.probs[:, 1:], ds.probs[:, 1:])
    assert np.max(np.abs(back.probs[:, 0] - ds.probs[:, 0])) < 1e-15
    header = path.read_text().splitlines()[0]
    assert header == "i,arm,y,z_1,z_2,z_3,z_4,p_1,p_2,p_3"


def test_csv_default_split(rng, tmp_path):
    ds = make_dataset(rng, 40, 1, 1, [1.0], [1.0])
    path = tmp_path / "d.csv"
    write_dataset_csv(ds, path)
    assert read_dataset_csv(path).split_at == 10


def test_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(UsageError):
        read_dataset_csv(path)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.05, 1.0), min_size=2, max_size=6))
def test_from_arms_normalisation(weights):
    w = np.array(weights) / (sum(weights) + 0.5)
    sp = SelectionProbs.from_arms(w)
    assert abs(sp.p0 + sp.p.sum() - 1.0) < 1e-12
