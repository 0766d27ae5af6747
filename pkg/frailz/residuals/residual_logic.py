from __future__ import annotations

from typing import Iterable, Union

import numpy as np
from scipy.special import ndtri

from frailz.constants import RSP_CLAMP
from frailz.errors import ValidationError

ArrayLike = Union[float, np.ndarray]

# Smallest uniform draw handed out; keeps u strictly inside (0, 1)
_U_FLOOR = 2.0**-54


def _unwrap(out: np.ndarray) -> ArrayLike:
    return float(out) if np.ndim(out) == 0 else out


def uniform_stream(seed: int, row_ids: Iterable[int]) -> np.ndarray:
    """
    One uniform draw per row id from a Philox stream keyed by ``seed``.

    The counter is the row id, so the draw for a given (seed, row id) does not
    depend on which other rows are requested or in what order.
    """
    seed = int(seed)
    if seed < 0:
        raise ValidationError("seed must be >= 0")
    draws = [
        np.random.Generator(np.random.Philox(key=seed, counter=int(r))).random()
        for r in row_ids
    ]
    return np.clip(np.asarray(draws, dtype=float), _U_FLOOR, 1.0 - _U_FLOOR)


def rsp(surv_prob_at_y: ArrayLike, status: ArrayLike, u: ArrayLike) -> ArrayLike:
    """
    Randomized survival probability: S(y) for events, u * S(y) for censored times.

    Raises:
        ValidationError: If S(y) is not in (0, 1], u not in (0, 1) or status not 0/1.
    """
    s = np.asarray(surv_prob_at_y, dtype=float)
    d = np.asarray(status)
    u_arr = np.asarray(u, dtype=float)
    if np.any(~(s > 0)):
        raise ValidationError("survival probability is 0 (degenerate model evaluation)")
    if np.any(s > 1):
        raise ValidationError("survival probability exceeds 1")
    if np.any(~((u_arr > 0) & (u_arr < 1))):
        raise ValidationError("u must lie strictly inside (0, 1)")
    if not np.all(np.isin(d, (0, 1))):
        raise ValidationError("status must be 0 or 1")
    return _unwrap(np.where(d == 1, s, u_arr * s))


def clamp_rsp(values: ArrayLike) -> ArrayLike:
    return _unwrap(np.clip(np.asarray(values, dtype=float), RSP_CLAMP, 1.0 - RSP_CLAMP))


def _check_open_unit(values: np.ndarray) -> None:
    if np.any(~((values > 0) & (values < 1))):
        raise ValidationError("RSP must lie strictly inside (0, 1)")


def z_residual(rsp_value: ArrayLike) -> ArrayLike:
    """-Phi^{-1}(rsp), standard normal under the true model."""
    r = np.asarray(rsp_value, dtype=float)
    _check_open_unit(r)
    return _unwrap(-ndtri(r))


def cs_residual(rsp_value: ArrayLike) -> ArrayLike:
    """-log(rsp), unit exponential under the true model."""
    r = np.asarray(rsp_value, dtype=float)
    _check_open_unit(r)
    return _unwrap(-np.log(r))
