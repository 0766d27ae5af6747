from __future__ import annotations

from typing import Mapping, Sequence, Tuple, Union

import numpy as np

from frailz.data.SurvivalDataset import SurvivalDataset
from frailz.errors import NoEventsError, ValidationError
from frailz.model.StepCHF import StepCHF

Frailties = Union[Sequence[float], np.ndarray, Mapping[str, float]]


def event_table(
    time: np.ndarray, status: np.ndarray, weights: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Distinct event times with tied-event counts and weighted risk-set sums.

    Returns:
        (event_times, d, risk) where ``risk[k]`` sums ``weights`` over observations
        with ``time >= event_times[k]``.
    """
    time = np.asarray(time, dtype=float)
    status = np.asarray(status)
    weights = np.asarray(weights, dtype=float)
    event_mask = status == 1
    if not event_mask.any():
        raise NoEventsError("no events: the baseline hazard is undefined")
    event_times, d = np.unique(time[event_mask], return_counts=True)
    order = np.argsort(time, kind="stable")
    sorted_time = time[order]
    tail_sums = np.cumsum(weights[order][::-1])[::-1]
    first = np.searchsorted(sorted_time, event_times, side="left")
    return event_times, d.astype(float), tail_sums[first]


def breslow_from_weights(time: np.ndarray, status: np.ndarray, weights: np.ndarray) -> StepCHF:
    """Breslow estimator for per-observation risk weights ``z * exp(x beta)``."""
    event_times, d, risk = event_table(time, status, weights)
    return StepCHF(event_times, np.cumsum(d / risk))


def nelson_aalen(time: np.ndarray, status: np.ndarray) -> StepCHF:
    """Nelson–Aalen cumulative hazard: the Breslow estimator with unit weights."""
    time = np.asarray(time, dtype=float)
    return breslow_from_weights(time, status, np.ones_like(time))


def frailty_vector(data: SurvivalDataset, frailties: Frailties) -> np.ndarray:
    """Per-cluster frailties aligned with ``data.clusters``."""
    if isinstance(frailties, Mapping):
        missing = [c for c in data.clusters if c not in frailties]
        if missing:
            raise ValidationError(f"no frailty given for clusters {missing[:5]}")
        z = np.asarray([float(frailties[c]) for c in data.clusters])
    else:
        z = np.asarray(frailties, dtype=float).reshape(-1)
        if z.shape[0] != data.g:
            raise ValidationError(f"expected {data.g} frailties, got {z.shape[0]}")
    if not np.all(np.isfinite(z)) or np.any(z <= 0):
        raise ValidationError("frailties must be finite and > 0")
    return z


def breslow_chf(data: SurvivalDataset, beta: Sequence[float], frailties: Frailties) -> StepCHF:
    """
    Breslow cumulative baseline hazard.

    H0(t) = sum over event times t_k <= t of d_k / sum_{l at risk at t_k} z_l exp(x_l beta),
    with tied events counted together.

    Raises:
        NoEventsError: If every observation is censored.
        ValidationError: On non-finite beta or non-positive frailties.
    """
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if beta.shape[0] != data.design.shape[1]:
        raise ValidationError(
            f"beta has {beta.shape[0]} entries, design has {data.design.shape[1]} columns"
        )
    if not np.all(np.isfinite(beta)):
        raise ValidationError("beta must be finite")
    z = frailty_vector(data, frailties)
    weights = z[data.cluster_codes] * np.exp(data.design @ beta)
    return breslow_from_weights(data.time, data.status, weights)
