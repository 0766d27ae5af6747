from frailz.diagnostics.stats import (
    Coordinates,
    auc,
    cs_chf_coordinates,
    outlier_flags,
    outlier_rows,
    qq_coordinates,
    r_squared,
    rejection_rate,
    sensitivity_fpr,
    shapiro_wilk,
    tail_probability,
)
from frailz.diagnostics.DiagnosticsReport import (
    DiagnosticsReport,
    diagnose,
    outlier_frequency,
    replicated_sw,
    residual_context,
)

__all__ = [
    "Coordinates",
    "auc",
    "cs_chf_coordinates",
    "outlier_flags",
    "outlier_rows",
    "qq_coordinates",
    "r_squared",
    "rejection_rate",
    "sensitivity_fpr",
    "shapiro_wilk",
    "tail_probability",
    "DiagnosticsReport",
    "diagnose",
    "outlier_frequency",
    "replicated_sw",
    "residual_context",
]
