from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from frailz.constants import CSV_FLOAT_FORMAT, NA_REP, SW_ALPHA
from frailz.crossval.cv_pipeline import cv_predictive
from frailz.crossval.fold_logic import make_kfold, make_loocv
from frailz.data.SurvivalDataset import SurvivalDataset
from frailz.diagnostics.stats import (
    auc,
    outlier_flags,
    r_squared,
    rejection_rate,
    sensitivity_fpr,
    shapiro_wilk,
    tail_probability,
)
from frailz.errors import ConvergenceError, FrailzError
from frailz.model.FrailtyFit import FrailtyFit, ThetaMode
from frailz.model.FrailtyFitter import FrailtyFitter
from frailz.residuals.PredictiveSurvival import PredictiveSurvival, predictive_nocv
from frailz.residuals.ResidualSet import Regime
from frailz.simulate.generators import SimulatedDataset, generate
from frailz.simulate.ScenarioConfig import DEFAULT_MODELS, ScenarioConfig
from frailz.utils.utils import derive_seed, parallel_map

logger = logging.getLogger("frailz.simulate")

METRICS = ("rejection_rate", "mean_p", "mean_tail_prob", "mean_r2", "sensitivity", "fpr")
TABLE_COLUMNS = ["scenario", "n", "regime", "model", "metric", "value", "mc_se"]
REPLICATE_COLUMNS = [
    "replicate", "regime", "model", "sw_p", "tail_prob", "r2",
    "sensitivity", "fpr", "n_used", "failed_folds", "error",
]

# (bad, good) model pair whose p-values feed the AUC row.
AUC_PAIRS = {
    "nonlinear": ("wrong_form", "true_form"),
    "outlier": ("contaminated", "clean"),
}


def _model_data(sim: SimulatedDataset, model: str) -> SimulatedDataset:
    """The dataset a model form is fitted to, with its ground truth."""
    if model == "true_form":
        return SimulatedDataset(
            data=sim.data.map_covariate("x2", np.log, "log_x2"),
            true_params=sim.true_params,
            true_sp=sim.true_sp,
            outlier_truth=sim.outlier_truth,
        )
    if model == "clean":
        if sim.clean is None:
            raise FrailzError("clean condition requested for an uncontaminated dataset")
        return sim.clean
    return sim


def _predictive(
    data: SurvivalDataset,
    regime: Regime,
    full_fit: FrailtyFit,
    seed: int,
    theta_mode: ThetaMode,
    method: str,
) -> PredictiveSurvival:
    if regime.kind == "nocv":
        return predictive_nocv(full_fit, data)
    plan = make_loocv(data) if regime.kind == "loocv" else make_kfold(data, regime.k, seed)
    return cv_predictive(data, plan, theta_mode, method=method, init=full_fit, workers=1)


def _nan_record(replicate: int, regime: Regime, model: str, error: str = "") -> dict:
    return {
        "replicate": replicate,
        "regime": regime.label,
        "model": model,
        "sw_p": math.nan,
        "tail_prob": math.nan,
        "r2": math.nan,
        "sensitivity": math.nan,
        "fpr": math.nan,
        "n_used": 0,
        "failed_folds": 0,
        "error": error,
    }


def run_replicate(
    config: ScenarioConfig,
    replicate: int,
    regimes: Sequence[Regime],
    models: Sequence[str],
    theta_mode: ThetaMode,
    method: str = "newton",
) -> List[dict]:
    """Per-(regime, model) metrics of one replicate. A failing cell keeps NaN metrics."""
    sim = generate(config, replicate)
    fitter = FrailtyFitter(theta_mode, method=method)
    residual_seed = derive_seed(config.seed, replicate)
    fold_seed = derive_seed(config.seed, replicate, 1)
    records = []
    for model in models:
        target = _model_data(sim, model)
        full_fit: Optional[FrailtyFit] = None
        full_error = ""
        try:
            full_fit = fitter.fit(target.data)
            if not full_fit.converged:
                raise ConvergenceError("full-data fit did not converge")
        except FrailzError as e:
            full_error = str(e)
        for regime in regimes:
            if full_error:
                records.append(_nan_record(replicate, regime, model, full_error))
                continue
            record = _nan_record(replicate, regime, model)
            try:
                pred = _predictive(target.data, regime, full_fit, fold_seed, theta_mode, method)
                res = pred.residuals(residual_seed)
                flags, valid = outlier_flags(res)
                record["sw_p"] = shapiro_wilk(res.valid_z())[1]
                record["tail_prob"] = tail_probability(res)
                record["r2"] = r_squared(pred.survival[valid], target.true_sp[valid])
                record["sensitivity"], record["fpr"] = sensitivity_fpr(
                    flags, target.outlier_truth, valid
                )
                record["n_used"] = res.n_used
                record["failed_folds"] = res.failed_folds
            except FrailzError as e:
                record["error"] = str(e)
            if record["error"]:
                logger.warning(
                    "Replicate %d, %s, %s excluded: %s",
                    replicate, regime.label, model, record["error"],
                )
            records.append(record)
    return records


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    values = values[np.isfinite(values)]
    if values.size == 0:
        return math.nan, math.nan
    se = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else math.nan
    return float(np.mean(values)), se


@dataclass(eq=False)
class ExperimentTable:
    """Per-replicate records of one design point and their Monte Carlo summaries."""

    config: ScenarioConfig
    regimes: Sequence[Regime]
    models: Sequence[str]
    records: List[dict] = field(default_factory=list)

    def replicates_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.records, columns=REPLICATE_COLUMNS)

    def _rows(self) -> Iterable[dict]:
        frame = self.replicates_frame()
        scenario, n = self.config.scenario, self.config.n
        for regime in self.regimes:
            for model in self.models:
                cell = frame[(frame["regime"] == regime.label) & (frame["model"] == model)]
                ok = cell[cell["error"] == ""]
                p = ok["sw_p"].to_numpy(dtype=float)
                rate = rejection_rate(p, SW_ALPHA)
                finite = int(np.isfinite(p).sum())
                rate_se = (
                    math.sqrt(rate * (1 - rate) / finite) if finite > 1 else math.nan
                )
                values: Dict[str, tuple] = {
                    "rejection_rate": (rate, rate_se),
                    "mean_p": _mean_se(p),
                    "mean_tail_prob": _mean_se(ok["tail_prob"].to_numpy(dtype=float)),
                    "mean_r2": _mean_se(ok["r2"].to_numpy(dtype=float)),
                    "sensitivity": _mean_se(ok["sensitivity"].to_numpy(dtype=float)),
                    "fpr": _mean_se(ok["fpr"].to_numpy(dtype=float)),
                    "excluded": (float(len(cell) - len(ok)), math.nan),
                    "failed_folds": (float(cell["failed_folds"].sum()), math.nan),
                }
                for metric, (value, se) in values.items():
                    yield dict(
                        scenario=scenario, n=n, regime=regime.label, model=model,
                        metric=metric, value=value, mc_se=se,
                    )
            bad, good = AUC_PAIRS[scenario]
            if bad in self.models and good in self.models:
                yield dict(
                    scenario=scenario, n=n, regime=regime.label, model=f"{bad}_vs_{good}",
                    metric="auc", value=self._auc(frame, regime, bad, good), mc_se=math.nan,
                )

    @staticmethod
    def _auc(frame: pd.DataFrame, regime: Regime, bad: str, good: str) -> float:
        def p_values(model: str) -> np.ndarray:
            rows = frame[(frame["regime"] == regime.label) & (frame["model"] == model)]
            p = rows["sw_p"].to_numpy(dtype=float)
            return p[np.isfinite(p)]

        a, b = p_values(bad), p_values(good)
        return auc(a, b) if a.size and b.size else math.nan

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self._rows()), columns=TABLE_COLUMNS)

    def to_csv(self, path: str) -> None:
        write_table(self.to_frame(), path)


def write_table(frame: pd.DataFrame, path: str) -> None:
    frame.to_csv(
        path, index=False, na_rep=NA_REP, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
    )


def combine(tables: Sequence[ExperimentTable]) -> pd.DataFrame:
    """Stack the summary rows of several design points."""
    frames = [t.to_frame() for t in tables]
    if not frames:
        return pd.DataFrame(columns=TABLE_COLUMNS)
    return pd.concat(frames, ignore_index=True)


def run_experiment(
    config: ScenarioConfig,
    regimes: Sequence[Regime | str] = ("nocv", "kfold:10", "loocv"),
    models: Optional[Sequence[str]] = None,
    theta_mode: ThetaMode | str = "profile",
    method: str = "newton",
    workers: int = 1,
    progress: bool = False,
) -> ExperimentTable:
    """
    Run ``config.replicates`` replicates and collect their metrics.

    Replicates run on ``workers`` threads; cross-validation inside a replicate
    stays sequential. Output depends only on the config, never on ``workers``.
    """
    regimes = [Regime.parse(r) for r in regimes]
    models = list(models or DEFAULT_MODELS[config.scenario])
    theta_mode = ThetaMode.parse(theta_mode)
    logger.info(
        "Simulating %s scenario: n=%d (g=%d, m=%d), %d replicates",
        config.scenario, config.n, config.g, config.m, config.replicates,
    )

    def one(replicate: int) -> List[dict]:
        return run_replicate(config, replicate, regimes, models, theta_mode, method)

    per_replicate = parallel_map(
        one,
        range(config.replicates),
        workers=workers,
        desc=f"{config.scenario} n={config.n}",
        progress=progress,
    )
    records = [record for batch in per_replicate for record in batch]
    return ExperimentTable(config=config, regimes=regimes, models=models, records=records)
