from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from frailz.constants import OUTLIER_THRESHOLD, SW_ALPHA, SW_MAX_N, SW_MIN_N
from frailz.crossval.FoldPlan import FoldPlan
from frailz.crossval.cv_pipeline import cv_predictive
from frailz.data.SurvivalDataset import SurvivalDataset
from frailz.diagnostics.stats import (
    Coordinates,
    cs_chf_coordinates,
    outlier_flags,
    outlier_rows,
    qq_coordinates,
    rejection_rate,
    shapiro_wilk,
    tail_probability,
)
from frailz.errors import ValidationError
from frailz.model.FrailtyFit import FrailtyFit, ThetaMode
from frailz.residuals.PredictiveSurvival import PredictiveSurvival, predictive_nocv
from frailz.residuals.ResidualSet import ResidualSet
from frailz.utils.utils import parallel_map, write_json

logger = logging.getLogger("frailz.diagnostics")

_EMPTY = Coordinates(np.zeros(0), np.zeros(0))


def _number(value: float) -> Optional[float]:
    return None if value is None or not math.isfinite(value) else float(value)


@dataclass(frozen=True, eq=False)
class DiagnosticsReport:
    """Goodness-of-fit and outlier summary of one residual set."""

    sw_stat: float
    sw_p: float
    tail_prob: float
    outlier_rows: List[int]
    qq: Coordinates
    cs_chf: Coordinates
    n_used: int
    threshold: float = OUTLIER_THRESHOLD
    regime: str = "nocv"
    seed: int = 0
    failed_folds: int = 0
    replicated_p: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def replicated_rejection_rate(self) -> float:
        return rejection_rate(self.replicated_p, SW_ALPHA)

    def to_dict(self) -> dict:
        payload = {
            "regime": self.regime,
            "seed": self.seed,
            "n_used": self.n_used,
            "failed_folds": self.failed_folds,
            "threshold": self.threshold,
            "sw_stat": _number(self.sw_stat),
            "sw_p": _number(self.sw_p),
            "tail_prob": _number(self.tail_prob),
            "outlier_rows": list(self.outlier_rows),
            "qq": {"theoretical": self.qq.x.tolist(), "empirical": self.qq.y.tolist()},
            "cs_chf": {"cs": self.cs_chf.x.tolist(), "chf": self.cs_chf.y.tolist()},
        }
        if self.replicated_p.size:
            payload["replicated_sw"] = {
                "replicates": int(self.replicated_p.size),
                "rejection_rate": _number(self.replicated_rejection_rate),
                "p_values": [_number(p) for p in self.replicated_p.tolist()],
            }
        return payload

    def to_json(self, path: str) -> None:
        write_json(self.to_dict(), path)


def diagnose(
    residuals: ResidualSet,
    threshold: float = OUTLIER_THRESHOLD,
    replicated_p: Optional[Sequence[float]] = None,
) -> DiagnosticsReport:
    """
    Build a report from one residual set. Statistics that need more residuals
    than are available (SW needs three, QQ two, the CS CHF one event) are left
    NaN or empty instead of failing the report.
    """
    z = residuals.valid_z()
    n_used = int(z.size)
    sw_stat = sw_p = float("nan")
    if SW_MIN_N <= n_used <= SW_MAX_N and np.ptp(z) > 0:
        sw_stat, sw_p = shapiro_wilk(z)
    tail = tail_probability(residuals, threshold) if n_used else float("nan")
    qq = qq_coordinates(residuals) if n_used >= 2 else _EMPTY
    has_events = bool(np.any(residuals.valid & (np.asarray(residuals.status) == 1)))
    cs_chf = cs_chf_coordinates(residuals) if has_events else _EMPTY
    return DiagnosticsReport(
        sw_stat=sw_stat,
        sw_p=sw_p,
        tail_prob=tail,
        outlier_rows=outlier_rows(residuals, threshold),
        qq=qq,
        cs_chf=cs_chf,
        n_used=n_used,
        threshold=float(threshold),
        regime=str(residuals.regime),
        seed=residuals.seed,
        failed_folds=residuals.failed_folds,
        replicated_p=np.asarray(replicated_p if replicated_p is not None else [], dtype=float),
    )


Context = Union[PredictiveSurvival, FrailtyFit, FoldPlan]


def residual_context(
    context: Context,
    data: Optional[SurvivalDataset] = None,
    theta_mode: ThetaMode | str = "profile",
    **options,
) -> PredictiveSurvival:
    """Resolve a fit (No-CV) or fold plan (CV) against ``data`` to its predictive survival."""
    if isinstance(context, PredictiveSurvival):
        return context
    if data is None:
        raise ValidationError("a dataset is required to resolve a fit or fold plan")
    if isinstance(context, FrailtyFit):
        return predictive_nocv(context, data)
    if isinstance(context, FoldPlan):
        return cv_predictive(data, context, theta_mode, **options)
    raise ValidationError(f"unsupported residual context {type(context).__name__}")


def replicated_sw(
    context: Context,
    data: Optional[SurvivalDataset] = None,
    seeds: Sequence[int] = range(1, 101),
    theta_mode: ThetaMode | str = "profile",
    workers: int = 1,
    progress: bool = False,
) -> np.ndarray:
    """
    Shapiro–Wilk p-value of the non-NA Z-residuals for each seed.

    Fits are computed once; each seed only redraws the uniforms behind the
    censored observations' RSPs.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValidationError("replicated SW needs at least one seed")
    predictive = residual_context(context, data, theta_mode, workers=workers)

    def one(seed: int) -> float:
        return shapiro_wilk(predictive.residuals(seed).valid_z())[1]

    p_values = parallel_map(one, seeds, workers=workers, desc="SW replicates", progress=progress)
    return np.asarray(p_values, dtype=float)


def outlier_frequency(
    context: Context,
    data: Optional[SurvivalDataset] = None,
    seeds: Sequence[int] = range(1, 101),
    threshold: float = OUTLIER_THRESHOLD,
    theta_mode: ThetaMode | str = "profile",
    workers: int = 1,
    progress: bool = False,
) -> pd.DataFrame:
    """
    How often each row is flagged (|z| > threshold) across seeds.

    Only censored rows change between seeds, so a row flagged under most seeds
    is a persistent outlier rather than an artefact of one uniform draw.
    Returns rows flagged at least once, most frequent first.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValidationError("flag frequency needs at least one seed")
    predictive = residual_context(context, data, theta_mode, workers=workers)

    def one(seed: int) -> np.ndarray:
        flags, _ = outlier_flags(predictive.residuals(seed), threshold)
        return flags

    counts = np.sum(
        parallel_map(one, seeds, workers=workers, desc="Outlier flags", progress=progress), axis=0
    )
    hit = counts > 0
    frame = pd.DataFrame(
        {
            "row_id": predictive.row_ids[hit],
            "flagged": counts[hit].astype(int),
            "fraction": counts[hit] / len(seeds),
        }
    )
    frame = frame.sort_values(["flagged", "row_id"], ascending=[False, True], kind="stable")
    return frame.reset_index(drop=True)
