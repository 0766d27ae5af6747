from frailz.model.StepCHF import StepCHF
from frailz.model.breslow import breslow_chf, breslow_from_weights, nelson_aalen
from frailz.model.FrailtyFit import FrailtyFit, ThetaMode, predict_survival
from frailz.model.FrailtyFitter import FrailtyFitter, fit

__all__ = [
    "StepCHF",
    "breslow_chf",
    "breslow_from_weights",
    "nelson_aalen",
    "FrailtyFit",
    "ThetaMode",
    "predict_survival",
    "FrailtyFitter",
    "fit",
]
