from __future__ import annotations

from typing import NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import mannwhitneyu, norm, pearsonr, shapiro

from frailz.constants import OUTLIER_THRESHOLD, SW_ALPHA, SW_MAX_N, SW_MIN_N
from frailz.errors import NoEventsError, ValidationError
from frailz.model.breslow import nelson_aalen
from frailz.residuals.ResidualSet import ResidualSet

Residuals = Union[ResidualSet, Sequence[float], np.ndarray]


class Coordinates(NamedTuple):
    x: np.ndarray
    y: np.ndarray


def _valid_z(z: Residuals) -> np.ndarray:
    values = z.z if isinstance(z, ResidualSet) else np.asarray(z, dtype=float).reshape(-1)
    return values[~np.isnan(values)]


def shapiro_wilk(sample: Sequence[float]) -> Tuple[float, float]:
    """
    Shapiro–Wilk W and p-value (Royston's AS R94 approximation).

    Raises:
        ValidationError: On NA entries, n outside [3, 5000] or a constant sample.
    """
    x = np.asarray(sample, dtype=float).reshape(-1)
    if np.isnan(x).any():
        raise ValidationError("Shapiro-Wilk sample contains NA entries")
    if not SW_MIN_N <= x.size <= SW_MAX_N:
        raise ValidationError(f"Shapiro-Wilk needs {SW_MIN_N} to {SW_MAX_N} values, got {x.size}")
    if np.ptp(x) == 0:
        raise ValidationError("Shapiro-Wilk sample is constant")
    result = shapiro(x)
    return float(result[0]), float(result[1])


def tail_probability(z: Residuals, threshold: float = OUTLIER_THRESHOLD) -> float:
    """Fraction of non-NA residuals with |z| > threshold."""
    values = _valid_z(z)
    if values.size == 0:
        raise ValidationError("tail probability needs at least one non-NA residual")
    return float(np.mean(np.abs(values) > threshold))


def outlier_rows(residuals: ResidualSet, threshold: float = OUTLIER_THRESHOLD) -> list:
    """Row ids whose |z| exceeds ``threshold``, in row order."""
    flagged = residuals.valid & (np.abs(np.nan_to_num(residuals.z)) > threshold)
    return [int(r) for r in residuals.row_ids[flagged]]


def outlier_flags(
    residuals: ResidualSet, threshold: float = OUTLIER_THRESHOLD
) -> Tuple[np.ndarray, np.ndarray]:
    """(|z| > threshold, non-NA mask) per observation."""
    valid = residuals.valid
    return valid & (np.abs(np.nan_to_num(residuals.z)) > threshold), valid


def auc(p_group_a: Sequence[float], p_group_b: Sequence[float]) -> float:
    """
    Mann–Whitney AUC, P(a < b) + P(a = b) / 2.

    Group a holds p-values of the wrong or contaminated condition, group b those
    of the true or clean one, so 1 means the bad condition always gives smaller
    p-values.
    """
    a = np.asarray(p_group_a, dtype=float).reshape(-1)
    b = np.asarray(p_group_b, dtype=float).reshape(-1)
    if a.size == 0 or b.size == 0:
        raise ValidationError("AUC needs two non-empty groups")
    if np.isnan(a).any() or np.isnan(b).any():
        raise ValidationError("AUC groups contain NA entries")
    u = mannwhitneyu(b, a, alternative="two-sided").statistic
    return float(u / (a.size * b.size))


def sensitivity_fpr(
    flags: Sequence[bool], truth: Sequence[bool], valid: Optional[Sequence[bool]] = None
) -> Tuple[float, float]:
    """
    Sensitivity TP/(TP+FN) and false positive rate FP/(FP+TN).

    Rows where ``valid`` is False (NA residuals) are left out. A rate whose
    denominator is empty is NaN.
    """
    f = np.asarray(flags, dtype=bool).reshape(-1)
    t = np.asarray(truth, dtype=bool).reshape(-1)
    if f.shape != t.shape:
        raise ValidationError(f"flags ({f.size}) and truth ({t.size}) are misaligned")
    keep = np.ones_like(f) if valid is None else np.asarray(valid, dtype=bool).reshape(-1)
    if keep.shape != f.shape:
        raise ValidationError("valid mask is misaligned with flags")
    f, t = f[keep], t[keep]
    positives = int(t.sum())
    negatives = int((~t).sum())
    sensitivity = float(np.sum(f & t) / positives) if positives else float("nan")
    fpr = float(np.sum(f & ~t) / negatives) if negatives else float("nan")
    return sensitivity, fpr


def r_squared(fitted_sp: Sequence[float], true_sp: Sequence[float]) -> float:
    """Squared Pearson correlation between fitted and true survival probabilities."""
    fitted = np.asarray(fitted_sp, dtype=float).reshape(-1)
    true = np.asarray(true_sp, dtype=float).reshape(-1)
    if fitted.shape != true.shape or fitted.size < 2:
        raise ValidationError("R^2 needs two equal-length samples of size >= 2")
    if np.ptp(true) == 0:
        raise ValidationError("R^2 is undefined for constant true survival probabilities")
    if np.ptp(fitted) == 0:
        return 0.0
    return float(pearsonr(fitted, true)[0] ** 2)


def qq_coordinates(z: Residuals) -> Coordinates:
    """Normal QQ pairs (Phi^{-1}((i - 0.5)/m), z_(i)) over sorted non-NA residuals."""
    values = np.sort(_valid_z(z))
    m = values.size
    if m < 2:
        raise ValidationError("QQ coordinates need at least two non-NA residuals")
    theoretical = norm.ppf((np.arange(1, m + 1) - 0.5) / m)
    return Coordinates(theoretical, values)


def cs_chf_coordinates(
    cs: Union[ResidualSet, Sequence[float]], status: Optional[Sequence[int]] = None
) -> Coordinates:
    """
    Nelson–Aalen cumulative hazard of Cox–Snell residuals treated as survival
    data, paired with the residual values at which it jumps.
    """
    if isinstance(cs, ResidualSet):
        values, flags = cs.cs, np.asarray(cs.status)
    else:
        if status is None:
            raise ValidationError("status flags are required with raw CS residuals")
        values = np.asarray(cs, dtype=float).reshape(-1)
        flags = np.asarray(status).reshape(-1)
        if flags.shape != values.shape:
            raise ValidationError("CS residuals and status are misaligned")
    keep = ~np.isnan(values)
    values, flags = values[keep], flags[keep]
    if not np.any(flags == 1):
        raise NoEventsError("CS residual CHF needs at least one event")
    chf = nelson_aalen(values, flags)
    return Coordinates(chf.times, chf.values)


def rejection_rate(p_values: Sequence[float], alpha: float = SW_ALPHA) -> float:
    """Fraction of finite p-values below ``alpha``."""
    p = np.asarray(p_values, dtype=float)
    p = p[np.isfinite(p)]
    if p.size == 0:
        return float("nan")
    return float(np.mean(p < alpha))
