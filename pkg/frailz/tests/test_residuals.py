import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import kstest

from frailz.errors import ValidationError
from frailz.model.FrailtyFitter import FrailtyFitter
from frailz.residuals.PredictiveSurvival import (
    PredictiveSurvival,
    predictive_nocv,
    residuals_nocv,
)
from frailz.residuals.ResidualSet import Regime
from frailz.residuals.residual_logic import (
    clamp_rsp,
    cs_residual,
    rsp,
    uniform_stream,
    z_residual,
)

from conftest import clustered


def test_rsp_examples():
    assert rsp(0.3, 1, 0.9) == pytest.approx(0.3)
    assert rsp(0.6, 0, 0.5) == pytest.approx(0.3)


def test_z_residual_examples():
    assert z_residual(0.5) == pytest.approx(0.0, abs=1e-12)
    assert z_residual(0.0013499) == pytest.approx(3.0, abs=1e-4)


def test_cs_residual_examples():
    assert cs_residual(1 / math.e) == pytest.approx(1.0)
    assert cs_residual(0.25) == pytest.approx(math.log(4))


@pytest.mark.parametrize(
    "s, d, u",
    [(0.0, 1, 0.5), (1.2, 1, 0.5), (0.5, 0, 0.0), (0.5, 0, 1.0), (0.5, 2, 0.5)],
)
def test_rsp_rejects_out_of_range(s, d, u):
    with pytest.raises(ValidationError):
        rsp(s, d, u)


def test_transforms_need_open_unit_interval():
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ValidationError):
            z_residual(bad)
        with pytest.raises(ValidationError):
            cs_residual(bad)


def test_clamp_keeps_quantiles_finite():
    assert clamp_rsp(0.0) == 1e-15
    assert clamp_rsp(1.0) == 1 - 1e-15
    assert np.isfinite(z_residual(clamp_rsp(0.0)))


def test_uniform_stream_ignores_request_order():
    forward = uniform_stream(7, [1, 2, 3, 4])
    backward = uniform_stream(7, [4, 3, 2, 1])
    np.testing.assert_array_equal(forward, backward[::-1])
    np.testing.assert_array_equal(uniform_stream(7, [3]), forward[2:3])
    assert not np.array_equal(forward, uniform_stream(8, [1, 2, 3, 4]))
    assert np.all((forward > 0) & (forward < 1))


def test_uniform_stream_rejects_negative_seed():
    with pytest.raises(ValidationError):
        uniform_stream(-1, [1])


@settings(deadline=None, max_examples=40)
@given(
    seed=st.integers(0, 2**32),
    rows=st.lists(st.integers(1, 10_000), min_size=1, max_size=20, unique=True),
)
def test_uniform_draw_depends_only_on_seed_and_row(seed, rows):
    together = uniform_stream(seed, rows)
    alone = np.concatenate([uniform_stream(seed, [r]) for r in rows])
    np.testing.assert_array_equal(together, alone)


@pytest.mark.parametrize(
    "text, label", [("none", "No-CV"), ("kfold:10", "10-fold"), ("LOOCV", "LOOCV")]
)
def test_regime_labels(text, label):
    assert Regime.parse(text).label == label


@pytest.mark.parametrize("text", ["kfold:1", "kfold", "jackknife"])
def test_regime_rejects(text):
    with pytest.raises(ValidationError):
        Regime.parse(text)


@pytest.fixture(scope="module")
def nocv_case():
    data = clustered(g=8, m=6, seed=5)
    fit = FrailtyFitter("fixed:0.5").fit(data)
    return data, fit


def test_nocv_events_do_not_depend_on_seed(nocv_case):
    data, fit = nocv_case
    first = residuals_nocv(fit, data, seed=1)
    second = residuals_nocv(fit, data, seed=2)
    events = data.status == 1
    np.testing.assert_array_equal(first.z[events], second.z[events])
    assert not np.array_equal(first.z[~events], second.z[~events])
    surv = fit.predict_survival(data.design, data.cluster, data.time)
    np.testing.assert_allclose(first.rsp[events], surv[events])
    assert np.all(first.rsp[~events] <= surv[~events])
    np.testing.assert_allclose(first.cs, -np.log(first.rsp))
    assert first.regime == Regime("nocv")
    assert first.n_used == data.n


def test_nocv_refuses_a_foreign_fit(nocv_case, small_data):
    _, fit = nocv_case
    with pytest.raises(ValidationError):
        predictive_nocv(fit, small_data)


def test_residual_csv_layout(nocv_case, tmp_path):
    data, fit = nocv_case
    path = tmp_path / "residuals.csv"
    residuals_nocv(fit, data, seed=3).to_csv(str(path))
    frame = pd.read_csv(path, keep_default_na=False)
    assert list(frame.columns) == [
        "row_id", "time", "status", "cluster", "rsp", "z", "cs", "regime", "seed", "na_reason",
    ]
    assert set(frame["regime"]) == {"nocv"}
    assert set(frame["na_reason"]) == {"NA"}


def test_missing_survival_gives_na_residuals():
    predictive = PredictiveSurvival(
        row_ids=np.array([1, 2, 3]),
        time=np.array([1.0, 2.0, 3.0]),
        status=np.array([1, 0, 1]),
        cluster=np.array(["a", "a", "b"], dtype=object),
        survival=np.array([0.4, np.nan, 0.7]),
        regime=Regime("loocv"),
    )
    res = predictive.residuals(seed=4)
    assert np.isnan(res.z[1]) and np.isnan(res.rsp[1]) and np.isnan(res.cs[1])
    assert res.na_reason[1] == "prediction_failed"
    assert res.n_used == 2
    np.testing.assert_allclose(res.z[[0, 2]], z_residual(np.array([0.4, 0.7])))


def test_rsp_is_uniform_under_the_true_model():
    rng = np.random.default_rng(2024)
    n = 2000
    rate = rng.uniform(0.5, 2.0, n)
    failure = rng.exponential(1 / rate)
    censor = rng.exponential(1.5, n)
    time = np.minimum(failure, censor)
    status = (failure <= censor).astype(int)
    predictive = PredictiveSurvival(
        row_ids=np.arange(1, n + 1),
        time=time,
        status=status,
        cluster=np.array(["c"] * n, dtype=object),
        survival=np.exp(-rate * time),
        regime=Regime("nocv"),
    )
    res = predictive.residuals(seed=9)
    assert kstest(res.rsp, "uniform").pvalue > 1e-3
    assert kstest(res.z, "norm").pvalue > 1e-3
