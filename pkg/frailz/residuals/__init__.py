from frailz.residuals.ResidualSet import Regime, ResidualSet
from frailz.residuals.residual_logic import (
    clamp_rsp,
    cs_residual,
    rsp,
    uniform_stream,
    z_residual,
)
from frailz.residuals.PredictiveSurvival import (
    PredictiveSurvival,
    predictive_nocv,
    residuals_nocv,
)

__all__ = [
    "Regime",
    "ResidualSet",
    "clamp_rsp",
    "cs_residual",
    "rsp",
    "uniform_stream",
    "z_residual",
    "PredictiveSurvival",
    "predictive_nocv",
    "residuals_nocv",
]
