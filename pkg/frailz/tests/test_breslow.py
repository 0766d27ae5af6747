import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frailz.data.SurvivalDataset import SurvivalDataset
from frailz.errors import NoEventsError, ValidationError
from frailz.model.StepCHF import StepCHF
from frailz.model.breslow import breslow_chf, breslow_from_weights, nelson_aalen


def test_nelson_aalen_all_events():
    chf = nelson_aalen(np.array([1.0, 2.0, 3.0]), np.array([1, 1, 1]))
    np.testing.assert_allclose(chf.values, [1 / 3, 1 / 3 + 1 / 2, 1 / 3 + 1 / 2 + 1])
    np.testing.assert_array_equal(chf.times, [1.0, 2.0, 3.0])


def test_single_event_among_four_at_risk():
    chf = nelson_aalen(np.array([1.0, 2.0, 3.0, 4.0]), np.array([1, 0, 0, 0]))
    assert chf(1.0) == pytest.approx(0.25)
    assert chf(10.0) == pytest.approx(0.25)
    assert chf(0.5) == 0.0


def test_tied_events_share_one_jump():
    chf = nelson_aalen(np.array([1.0, 1.0, 2.0]), np.array([1, 1, 1]))
    np.testing.assert_allclose(chf.values, [2 / 3, 2 / 3 + 1])


def test_breslow_reduces_to_nelson_aalen(small_data):
    chf = breslow_chf(small_data, np.zeros(2), np.ones(small_data.g))
    na = nelson_aalen(small_data.time, small_data.status)
    np.testing.assert_allclose(chf.values, na.values)


def test_breslow_accepts_frailty_mapping(small_data):
    frailties = {c: 1.0 + i / 10 for i, c in enumerate(small_data.clusters)}
    by_map = breslow_chf(small_data, [0.3, -0.2], frailties)
    by_vector = breslow_chf(small_data, [0.3, -0.2], list(frailties.values()))
    np.testing.assert_allclose(by_map.values, by_vector.values)


def test_breslow_errors(small_data):
    with pytest.raises(ValidationError):
        breslow_chf(small_data, [0.0], np.ones(small_data.g))
    with pytest.raises(ValidationError):
        breslow_chf(small_data, [0.0, 0.0], np.ones(small_data.g - 1))
    with pytest.raises(ValidationError):
        breslow_chf(small_data, [0.0, 0.0], np.zeros(small_data.g))
    censored = SurvivalDataset(
        time=[1.0, 2.0], status=[0, 0], cluster=["a", "b"], covariates={}
    )
    with pytest.raises(NoEventsError):
        breslow_chf(censored, [], [1.0, 1.0])


def test_step_chf_validation():
    with pytest.raises(ValidationError):
        StepCHF(np.array([2.0, 1.0]), np.array([0.1, 0.2]))
    with pytest.raises(ValidationError):
        StepCHF(np.array([1.0, 2.0]), np.array([0.3, 0.2]))
    chf = StepCHF(np.array([1.0, 2.0]), np.array([0.1, 0.4]))
    np.testing.assert_allclose(chf(np.array([0.5, 1.0, 1.5, 2.0, 9.0])), [0, 0.1, 0.1, 0.4, 0.4])
    np.testing.assert_allclose(chf.increments(), [0.1, 0.3])
    assert StepCHF.from_dict(chf.to_dict())(1.5) == pytest.approx(0.1)


def test_first_and_last_times():
    chf = StepCHF(np.array([4.0, 6.0]), np.array([0.2, 0.5]))
    assert (chf.first_time, chf.last_time) == (4.0, 6.0)
    assert chf(3.9) == 0.0
    empty = StepCHF(np.array([]), np.array([]))
    assert (empty.first_time, empty.last_time) == (0.0, 0.0)


@st.composite
def weighted_survival(draw):
    n = draw(st.integers(min_value=1, max_value=30))
    time = draw(st.lists(st.integers(1, 12), min_size=n, max_size=n))
    status = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    weights = draw(
        st.lists(st.floats(0.05, 20.0, allow_nan=False), min_size=n, max_size=n)
    )
    status[draw(st.integers(0, n - 1))] = 1
    return np.array(time, dtype=float), np.array(status), np.array(weights)


@settings(deadline=None, max_examples=60)
@given(weighted_survival())
def test_breslow_is_a_step_function_over_event_times(case):
    time, status, weights = case
    chf = breslow_from_weights(time, status, weights)
    np.testing.assert_array_equal(chf.times, np.unique(time[status == 1]))
    assert np.all(np.diff(chf.values) > 0)
    assert chf.values[0] > 0
    # each jump is the tied event count over the weighted risk set
    for t, jump in zip(chf.times, chf.increments()):
        expected = np.sum((time == t) & (status == 1)) / weights[time >= t].sum()
        assert jump == pytest.approx(expected, rel=1e-9)
