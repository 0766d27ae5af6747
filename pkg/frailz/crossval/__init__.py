from frailz.crossval.FoldPlan import NA_FOLD, FoldPlan
from frailz.crossval.fold_logic import Coverage, make_kfold, make_loocv
from frailz.crossval.cv_pipeline import cv_predictive, cv_residuals

__all__ = [
    "NA_FOLD",
    "FoldPlan",
    "Coverage",
    "make_kfold",
    "make_loocv",
    "cv_predictive",
    "cv_residuals",
]
