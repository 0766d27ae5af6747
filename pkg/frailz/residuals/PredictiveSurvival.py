from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from frailz.constants import RSP_CLAMP
from frailz.data.SurvivalDataset import SurvivalDataset
from frailz.errors import ValidationError
from frailz.model.FrailtyFit import FrailtyFit
from frailz.residuals.ResidualSet import Regime, ResidualSet
from frailz.residuals.residual_logic import (
    clamp_rsp,
    cs_residual,
    rsp,
    uniform_stream,
    z_residual,
)

logger = logging.getLogger("frailz.residuals")


@dataclass(frozen=True, eq=False)
class PredictiveSurvival:
    """
    Predictive survival probabilities S(y) for every observation under one regime.

    This is everything a residual set needs except the uniform draws, so
    replicated residuals over many seeds reuse the same fits. NA observations
    hold NaN and a reason string.
    """

    row_ids: np.ndarray
    time: np.ndarray
    status: np.ndarray
    cluster: np.ndarray
    survival: np.ndarray
    regime: Regime
    na_reason: Tuple[str, ...] = ()
    failed_folds: int = 0

    def __post_init__(self) -> None:
        n = len(self.row_ids)
        if not (len(self.time) == len(self.status) == len(self.cluster) == len(self.survival) == n):
            raise ValidationError("PredictiveSurvival fields must have equal length")
        reasons = tuple(self.na_reason) if self.na_reason else ("",) * n
        survival = np.asarray(self.survival, dtype=float)
        reasons = tuple(
            r or ("prediction_failed" if np.isnan(s) else "") for r, s in zip(reasons, survival)
        )
        object.__setattr__(self, "survival", survival)
        object.__setattr__(self, "na_reason", reasons)

    @property
    def valid(self) -> np.ndarray:
        return ~np.isnan(self.survival)

    @property
    def n_censored(self) -> int:
        return int(np.sum(self.valid & (np.asarray(self.status) == 0)))

    def residuals(self, seed: int) -> ResidualSet:
        """Draw the shared u-stream for ``seed`` and transform to RSP, Z and CS residuals."""
        n = len(self.row_ids)
        valid = self.valid
        u = uniform_stream(seed, self.row_ids)
        out_rsp = np.full(n, np.nan)
        out_z = np.full(n, np.nan)
        out_cs = np.full(n, np.nan)
        if valid.any():
            s = np.clip(self.survival[valid], RSP_CLAMP, 1.0)
            r = np.atleast_1d(clamp_rsp(rsp(s, self.status[valid], u[valid])))
            out_rsp[valid] = r
            out_z[valid] = z_residual(r)
            out_cs[valid] = cs_residual(r)
        return ResidualSet(
            row_ids=self.row_ids,
            time=self.time,
            status=self.status,
            cluster=self.cluster,
            rsp=out_rsp,
            z=out_z,
            cs=out_cs,
            regime=self.regime,
            seed=int(seed),
            na_reason=self.na_reason,
            failed_folds=self.failed_folds,
        )


def predictive_nocv(fit: FrailtyFit, data: SurvivalDataset) -> PredictiveSurvival:
    """In-sample predictive survival of every observation from a full-data fit."""
    if fit.data_fingerprint and fit.data_fingerprint != data.fingerprint():
        raise ValidationError("fit was not produced from this dataset")
    survival = fit.predict_survival(data.design, data.cluster, data.time)
    return PredictiveSurvival(
        row_ids=data.row_ids,
        time=data.time,
        status=data.status,
        cluster=data.cluster,
        survival=np.atleast_1d(survival),
        regime=Regime("nocv"),
    )


def residuals_nocv(fit: FrailtyFit, data: SurvivalDataset, seed: int) -> ResidualSet:
    """No-CV residuals: every observation scored by the fit to the full dataset."""
    return predictive_nocv(fit, data).residuals(seed)
