import json
import math

import numpy as np
import pytest
from scipy.stats import norm

from frailz.diagnostics.DiagnosticsReport import (
    diagnose,
    outlier_frequency,
    replicated_sw,
    residual_context,
)
from frailz.diagnostics.stats import (
    auc,
    cs_chf_coordinates,
    qq_coordinates,
    r_squared,
    rejection_rate,
    sensitivity_fpr,
    shapiro_wilk,
    tail_probability,
)
from frailz.errors import NoEventsError, ValidationError
from frailz.model.FrailtyFitter import FrailtyFitter
from frailz.residuals.PredictiveSurvival import PredictiveSurvival
from frailz.residuals.ResidualSet import Regime, ResidualSet

C1 = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056]
C2 = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633]
C3 = [0.544, -0.39978, 0.025054, -6.714e-4]
C4 = [1.3822, -0.77857, 0.062767, -0.0020322]
C5 = [-1.5861, -0.31082, -0.083751, 0.0038915]
C6 = [-0.4803, -0.082676, 0.0030302]


def _poly(coefs, x):
    return sum(c * x**i for i, c in enumerate(coefs))


def royston_sw(sample):
    """Independent AS R94 W and p-value for 4 <= n <= 5000."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    half = n // 2
    m = norm.ppf((np.arange(1, half + 1) - 0.375) / (n + 0.25))
    summ2 = 2.0 * np.sum(m**2)
    rsn = 1.0 / math.sqrt(n)
    a1 = _poly(C1, rsn) - m[0] / math.sqrt(summ2)
    a = np.empty(half)
    a[0] = a1
    if n > 5:
        a2 = -m[1] / math.sqrt(summ2) + _poly(C2, rsn)
        fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1**2 - 2 * a2**2))
        a[1] = a2
        first = 2
    else:
        fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1**2))
        first = 1
    a[first:] = -m[first:] / fac

    spread = x[::-1][:half] - x[:half]
    w = float(np.dot(a, spread) ** 2 / np.sum((x - x.mean()) ** 2))

    y = math.log(1 - w)
    if n <= 11:
        gamma = -2.273 + 0.459 * n
        y = -math.log(gamma - y)
        mu, sigma = _poly(C3, n), math.exp(_poly(C4, n))
    else:
        ln = math.log(n)
        mu, sigma = _poly(C5, ln), math.exp(_poly(C6, ln))
    return w, float(norm.sf((y - mu) / sigma))


@pytest.mark.parametrize("n", [8, 11, 12, 30, 50, 200])
@pytest.mark.parametrize("draw", ["normal", "exponential"])
def test_shapiro_wilk_matches_royston(n, draw):
    rng = np.random.default_rng(n)
    sample = rng.standard_normal(n) if draw == "normal" else rng.exponential(size=n)
    w, p = shapiro_wilk(sample)
    w_ref, p_ref = royston_sw(sample)
    assert abs(w - w_ref) < 1e-6
    assert p == pytest.approx(p_ref, rel=1e-3, abs=1e-6)


def test_shapiro_wilk_on_normal_scores():
    n = 50
    scores = norm.ppf((np.arange(1, n + 1) - 0.375) / (n + 0.25))
    w, p = shapiro_wilk(scores)
    assert w > 0.99
    assert p > 0.9


@pytest.mark.parametrize("sample", [[1.0, 2.0], [1.0, np.nan, 2.0, 3.0], [2.0] * 5])
def test_shapiro_wilk_rejects(sample):
    with pytest.raises(ValidationError):
        shapiro_wilk(sample)


def test_tail_probability():
    assert tail_probability([0.0, 1.0, -2.0]) == 0.0
    assert tail_probability([3.1, -3.5, 0.0, 0.0]) == 0.5
    assert tail_probability([np.nan, 3.5]) == 1.0
    with pytest.raises(ValidationError):
        tail_probability([np.nan])


def test_auc():
    assert auc([0.1, 0.2], [0.3, 0.4]) == 1.0
    assert auc([0.1, 0.2], [0.1, 0.2]) == 0.5
    assert auc([1, 3], [2, 4]) == 0.75
    with pytest.raises(ValidationError):
        auc([], [0.3])


def test_sensitivity_fpr():
    truth = [True, True, False, False]
    assert sensitivity_fpr(truth, truth) == (1.0, 0.0)
    assert sensitivity_fpr([False] * 4, truth) == (0.0, 0.0)
    assert sensitivity_fpr([True, False, True, False], truth) == (0.5, 0.5)
    # NA rows drop out of both rates
    sens, fpr = sensitivity_fpr([True, False, True, False], truth, valid=[True, False, True, True])
    assert (sens, fpr) == (1.0, 0.5)
    with pytest.raises(ValidationError):
        sensitivity_fpr([True], truth)


def test_sensitivity_without_positives_is_nan():
    sens, fpr = sensitivity_fpr([False, True], [False, False])
    assert math.isnan(sens)
    assert fpr == 0.5


def test_r_squared():
    assert r_squared([0.1, 0.4, 0.5], [0.2, 0.4, 0.6]) == pytest.approx(12 / 13)
    assert r_squared([0.2, 0.4, 0.6], [0.2, 0.4, 0.6]) == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        r_squared([0.1, 0.2], [0.5, 0.5])


def test_qq_coordinates():
    q = norm.ppf(0.75)
    coords = qq_coordinates([1.0, -1.0])
    np.testing.assert_allclose(coords.x, [-q, q])
    np.testing.assert_allclose(coords.y, [-1.0, 1.0])
    with pytest.raises(ValidationError):
        qq_coordinates([1.0, np.nan])


def test_cs_chf_coordinates():
    coords = cs_chf_coordinates([0.2, 0.5, 1.1], [1, 1, 1])
    np.testing.assert_allclose(coords.x, [0.2, 0.5, 1.1])
    np.testing.assert_allclose(coords.y, [1 / 3, 5 / 6, 11 / 6])
    with pytest.raises(NoEventsError):
        cs_chf_coordinates([0.2, 0.5], [0, 0])
    with pytest.raises(ValidationError):
        cs_chf_coordinates([0.2, 0.5])


def test_rejection_rate():
    assert rejection_rate([0.01, 0.2, np.nan, 0.04]) == pytest.approx(2 / 3)
    assert math.isnan(rejection_rate([np.nan]))


def _residual_set(z, status, regime="nocv"):
    z = np.asarray(z, dtype=float)
    r = norm.sf(z)
    n = z.size
    return ResidualSet(
        row_ids=np.arange(1, n + 1),
        time=np.arange(1.0, n + 1),
        status=np.asarray(status),
        cluster=np.array(["a"] * n, dtype=object),
        rsp=r,
        z=z,
        cs=-np.log(r),
        regime=Regime.parse(regime),
        seed=1,
    )


def test_diagnose_report(tmp_path):
    z = np.random.default_rng(1).permutation(norm.ppf((np.arange(1, 41) - 0.5) / 40))
    z[[4, 17]] = [3.4, -3.2]
    z[9] = np.nan
    res = _residual_set(z, np.ones(40, dtype=int), regime="loocv")
    report = diagnose(res, replicated_p=[0.01, 0.5])
    assert report.n_used == 39
    assert report.outlier_rows == [5, 18]
    assert report.tail_prob == pytest.approx(2 / 39)
    assert 0 < report.sw_p < 1
    assert report.replicated_rejection_rate == 0.5
    assert report.qq.x.size == 39
    path = tmp_path / "diagnostics.json"
    report.to_json(str(path))
    payload = json.loads(path.read_text(encoding="utf-8"))
    assert payload["regime"] == "loocv"
    assert payload["outlier_rows"] == [5, 18]
    assert payload["replicated_sw"]["replicates"] == 2


def test_diagnose_with_too_few_residuals():
    report = diagnose(_residual_set([0.3, np.nan], [0, 0]))
    assert math.isnan(report.sw_p)
    assert report.qq.x.size == 0
    assert report.cs_chf.x.size == 0
    assert report.to_dict()["sw_p"] is None


def _predictive(status):
    rng = np.random.default_rng(7)
    n = len(status)
    return PredictiveSurvival(
        row_ids=np.arange(1, n + 1),
        time=np.arange(1.0, n + 1),
        status=np.asarray(status),
        cluster=np.array(["a"] * n, dtype=object),
        survival=rng.uniform(0.05, 0.95, n),
        regime=Regime("nocv"),
    )


def test_replicated_sw_without_censoring_is_constant():
    p = replicated_sw(_predictive([1] * 30), seeds=range(1, 6))
    assert p.shape == (5,)
    assert np.all(p == p[0])


def test_replicated_sw_varies_with_censoring():
    p = replicated_sw(_predictive([1, 0] * 15), seeds=range(1, 6), workers=2)
    assert len(set(p.tolist())) > 1
    assert np.all((p >= 0) & (p <= 1))


def test_replicated_sw_from_a_fit(small_data):
    fit = FrailtyFitter("fixed:0.5").fit(small_data)
    p = replicated_sw(fit, small_data, seeds=[1, 2, 3])
    assert p.shape == (3,)
    with pytest.raises(ValidationError):
        residual_context(fit)
    with pytest.raises(ValidationError):
        replicated_sw(fit, small_data, seeds=[])


def test_outlier_frequency_counts_persistent_rows():
    predictive = _predictive([1] * 30)
    survival = predictive.survival.copy()
    survival[[3, 12]] = [1e-5, 1 - 1e-5]
    predictive = PredictiveSurvival(
        row_ids=predictive.row_ids,
        time=predictive.time,
        status=predictive.status,
        cluster=predictive.cluster,
        survival=survival,
        regime=predictive.regime,
    )
    frame = outlier_frequency(predictive, seeds=range(1, 9))
    assert frame["row_id"].tolist() == [4, 13]
    assert frame["flagged"].tolist() == [8, 8]
    assert frame["fraction"].tolist() == [1.0, 1.0]
