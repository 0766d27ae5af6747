from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np

from frailz.crossval.FoldPlan import FoldPlan
from frailz.data.SurvivalDataset import SurvivalDataset
from frailz.errors import FrailzError
from frailz.model.FrailtyFit import FrailtyFit, ThetaMode
from frailz.model.FrailtyFitter import FrailtyFitter
from frailz.residuals.PredictiveSurvival import PredictiveSurvival
from frailz.residuals.ResidualSet import ResidualSet
from frailz.utils.utils import parallel_map

logger = logging.getLogger("frailz.crossval")

FOLD_FAILED = "fold_failed"
BEFORE_FIRST_EVENT = "before_first_event"

FoldResult = Tuple[np.ndarray, Optional[np.ndarray], str]


def _before_first_event(
    data: SurvivalDataset, test_idx: np.ndarray, fold_fit: FrailtyFit
) -> np.ndarray:
    """Held-out events earlier than every training event; their Breslow H0 is 0."""
    first = fold_fit.baseline_chf.first_time
    return (data.status[test_idx] == 1) & (data.time[test_idx] < first)


def cv_predictive(
    data: SurvivalDataset,
    plan: FoldPlan,
    theta_mode: ThetaMode | str = "profile",
    method: str = "newton",
    init: Optional[FrailtyFit] = None,
    workers: int = 1,
    progress: bool = False,
) -> PredictiveSurvival:
    """
    Fit each fold's training set and score its held-out observations.

    Theta is re-estimated within every fold. A fold whose fit raises or does not
    converge leaves its test observations NA with reason ``fold_failed``. A
    held-out event that precedes every event of its training set would get
    S = 1 and the smallest possible Z-residual; it is left NA with reason
    ``before_first_event`` instead. Censored observations there keep S = 1.
    """
    plan.check_matches(data)
    fitter = FrailtyFitter(theta_mode, method=method)

    def run_fold(fold: int) -> FoldResult:
        test_idx = np.flatnonzero(plan.test_mask(fold))
        train = data.subset(plan.training_mask(fold))
        try:
            fold_fit = fitter.fit(train, init=init)
            if not fold_fit.converged:
                logger.warning("Fold %d failed: fit did not converge", fold)
                return test_idx, None, "not converged"
            surv = np.atleast_1d(
                fold_fit.predict_survival(
                    data.design[test_idx], data.cluster[test_idx], data.time[test_idx]
                )
            ).astype(float)
        except FrailzError as e:
            logger.warning("Fold %d failed: %s", fold, e)
            return test_idx, None, str(e)
        early = _before_first_event(data, test_idx, fold_fit)
        if early.any():
            logger.info(
                "Fold %d: rows %s are events before the first training event (t=%g); left NA",
                fold,
                data.row_ids[test_idx[early]].tolist(),
                fold_fit.baseline_chf.first_time,
            )
            surv[early] = np.nan
        return test_idx, surv, ""

    folds = list(plan.folds())
    results = parallel_map(
        run_fold, folds, workers=workers, desc=f"{plan.regime.label} folds", progress=progress
    )

    survival = np.full(data.n, np.nan)
    reasons = list(plan.na_reason)
    failed = 0
    for test_idx, surv, _ in results:
        if surv is None:
            failed += 1
            for pos in test_idx:
                reasons[pos] = FOLD_FAILED
            continue
        survival[test_idx] = surv
        for pos in test_idx[np.isnan(surv)]:
            reasons[pos] = BEFORE_FIRST_EVENT
    if failed:
        logger.warning("%d of %d folds failed; their observations are NA", failed, len(folds))

    return PredictiveSurvival(
        row_ids=data.row_ids,
        time=data.time,
        status=data.status,
        cluster=data.cluster,
        survival=survival,
        regime=plan.regime,
        na_reason=tuple(reasons),
        failed_folds=failed,
    )


def cv_residuals(
    data: SurvivalDataset,
    plan: FoldPlan,
    seed: int,
    theta_mode: ThetaMode | str = "profile",
    **options,
) -> ResidualSet:
    """Cross-validatory residuals for every observation the plan holds out."""
    return cv_predictive(data, plan, theta_mode, **options).residuals(seed)
