from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.stats import norm

from frailz.constants import THETA_PATTERN
from frailz.errors import UnknownClusterError, ValidationError
from frailz.model.StepCHF import StepCHF


@dataclass(frozen=True)
class ThetaMode:
    """How the frailty variance is chosen: profiled, held fixed, or switched off."""

    kind: Literal["profile", "fixed", "none"] = "profile"
    value: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in ("profile", "fixed", "none"):
            raise ValidationError(f"unknown theta mode {self.kind!r}")
        if self.kind == "fixed":
            if self.value is None or not math.isfinite(self.value) or self.value < 0:
                raise ValidationError("fixed theta must be a finite value >= 0")
            if self.value == 0:
                object.__setattr__(self, "kind", "none")
                object.__setattr__(self, "value", None)
        elif self.value is not None:
            raise ValidationError(f"theta mode {self.kind!r} takes no value")

    @classmethod
    def profile(cls) -> "ThetaMode":
        return cls("profile")

    @classmethod
    def fixed(cls, theta: float) -> "ThetaMode":
        return cls("fixed", float(theta))

    @classmethod
    def none(cls) -> "ThetaMode":
        return cls("none")

    @classmethod
    def parse(cls, text: Union[str, "ThetaMode"]) -> "ThetaMode":
        if isinstance(text, ThetaMode):
            return text
        s = str(text).strip().lower()
        if not THETA_PATTERN.fullmatch(s):
            raise ValidationError(
                f"invalid theta mode {text!r}; expected 'profile', 'none' or 'fixed:<theta>'"
            )
        if s.startswith("fixed:"):
            return cls.fixed(float(s.split(":", 1)[1]))
        return cls(s)

    def __str__(self) -> str:
        return f"fixed:{self.value:g}" if self.kind == "fixed" else self.kind


@dataclass(frozen=True, eq=False)
class FrailtyFit:
    """
    A fitted shared gamma frailty Cox model.

    ``frailties[i]`` is z_i for ``clusters[i]``; ``loglik`` is the penalized partial
    log-likelihood at convergence and ``marginal_loglik`` the integrated (profile)
    log-likelihood used to choose theta.
    """

    beta: np.ndarray
    columns: Tuple[str, ...]
    clusters: Tuple[str, ...]
    frailties: np.ndarray
    theta: float
    baseline_chf: StepCHF
    loglik: float
    iterations: int
    converged: bool
    std_errors: np.ndarray = field(default_factory=lambda: np.zeros(0))
    marginal_loglik: float = float("nan")
    theta_mode: ThetaMode = field(default_factory=ThetaMode.profile)
    method: str = "newton"
    n: int = 0
    n_events: int = 0
    data_fingerprint: str = ""
    profile_trace: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        beta = np.asarray(self.beta, dtype=float).reshape(-1)
        z = np.asarray(self.frailties, dtype=float).reshape(-1)
        se = np.asarray(self.std_errors, dtype=float).reshape(-1)
        if beta.shape[0] != len(self.columns):
            raise ValidationError("beta length does not match columns")
        if z.shape[0] != len(self.clusters):
            raise ValidationError("frailties length does not match clusters")
        if np.any(z <= 0) or not np.all(np.isfinite(z)):
            raise ValidationError("frailties must be finite and > 0")
        if self.theta < 0:
            raise ValidationError("theta must be >= 0")
        if self.theta == 0 and np.any(z != 1.0):
            raise ValidationError("theta = 0 requires all frailties equal to 1")
        if se.size == 0:
            se = np.full(beta.shape, np.nan)
        for arr in (beta, z, se):
            arr.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "frailties", z)
        object.__setattr__(self, "std_errors", se)
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "clusters", tuple(str(c) for c in self.clusters))

    @cached_property
    def _cluster_lookup(self) -> Dict[str, int]:
        return {c: i for i, c in enumerate(self.clusters)}

    def has_cluster(self, cluster: str) -> bool:
        return str(cluster) in self._cluster_lookup

    def frailty_of(self, cluster: str) -> float:
        try:
            return float(self.frailties[self._cluster_lookup[str(cluster)]])
        except KeyError:
            raise UnknownClusterError(f"cluster {cluster!r} was not in the fitted data") from None

    def frailties_for(self, clusters: Sequence[str]) -> np.ndarray:
        return np.asarray([self.frailty_of(c) for c in clusters])

    def predict_survival(
        self, x: Sequence[float], cluster: Union[str, Sequence[str]], t: Union[float, np.ndarray]
    ) -> Union[float, np.ndarray]:
        """
        exp(-z_cluster * exp(x beta) * H0(t)).

        ``x`` is one expanded design row (or a matrix of rows, with matching
        ``cluster`` and ``t`` arrays). H0 is held constant past its last time
        and is 0 before its first, where S = 1.
        """
        x_arr = np.asarray(x, dtype=float)
        if x_arr.shape[-1] != self.beta.shape[0]:
            raise ValidationError(
                f"covariate vector has {x_arr.shape[-1]} entries, fit has {self.beta.shape[0]}"
            )
        t_arr = np.asarray(t, dtype=float)
        if np.any(~(t_arr > 0)):
            raise ValidationError("t must be > 0")
        if x_arr.ndim == 1:
            z = self.frailty_of(cluster)
        else:
            z = self.frailties_for(cluster)
        cumhaz = z * np.exp(x_arr @ self.beta) * self.baseline_chf(t_arr)
        out = np.exp(-cumhaz)
        return float(out) if np.ndim(out) == 0 else out

    # ——— Reporting ———

    def summary_frame(self) -> pd.DataFrame:
        se = self.std_errors
        with np.errstate(divide="ignore", invalid="ignore"):
            wald = self.beta / se
        p = 2.0 * norm.sf(np.abs(wald))
        q = norm.ppf(0.975)
        return pd.DataFrame(
            {
                "covariate": self.columns,
                "coef": self.beta,
                "exp_coef": np.exp(self.beta),
                "se": se,
                "z": wald,
                "p": p,
                "lower_95": np.exp(self.beta - q * se),
                "upper_95": np.exp(self.beta + q * se),
            }
        )

    def summary(self) -> str:
        frame = self.summary_frame()
        width = max([len("covariate")] + [len(c) for c in self.columns])
        lines = [
            f"{'covariate':<{width}} {'coef':>9} {'exp(coef)':>9} {'se':>8} {'z':>7} {'p':>9}"
        ]
        for row in frame.itertuples(index=False):
            lines.append(
                f"{row.covariate:<{width}} {row.coef:>9.3f} {row.exp_coef:>9.3f} "
                f"{row.se:>8.3f} {row.z:>7.2f} {row.p:>9.3g}"
            )
        lines.append("")
        lines.append(f"theta (frailty variance): {self.theta:.6g} [{self.theta_mode}]")
        lines.append(f"clusters: {len(self.clusters)}  n: {self.n}  events: {self.n_events}")
        lines.append(f"penalized log-likelihood: {self.loglik:.4f}")
        lines.append(f"marginal log-likelihood: {self.marginal_loglik:.4f}")
        status = "converged" if self.converged else "NOT converged"
        lines.append(f"iterations: {self.iterations} ({status}, method={self.method})")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "beta": self.beta.tolist(),
            "columns": list(self.columns),
            "std_errors": [None if math.isnan(v) else v for v in self.std_errors.tolist()],
            "clusters": list(self.clusters),
            "frailties": self.frailties.tolist(),
            "theta": self.theta,
            "theta_mode": str(self.theta_mode),
            "baseline_chf": self.baseline_chf.to_dict(),
            "loglik": self.loglik,
            "marginal_loglik": self.marginal_loglik,
            "iterations": self.iterations,
            "converged": self.converged,
            "method": self.method,
            "n": self.n,
            "n_events": self.n_events,
            "data_fingerprint": self.data_fingerprint,
            "profile_trace": [list(p) for p in self.profile_trace],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "FrailtyFit":
        return cls(
            beta=np.asarray(payload["beta"], dtype=float),
            columns=tuple(payload["columns"]),
            clusters=tuple(payload["clusters"]),
            frailties=np.asarray(payload["frailties"], dtype=float),
            theta=float(payload["theta"]),
            baseline_chf=StepCHF.from_dict(payload["baseline_chf"]),
            loglik=float(payload["loglik"]),
            iterations=int(payload["iterations"]),
            converged=bool(payload["converged"]),
            std_errors=np.asarray(
                [np.nan if v is None else v for v in payload.get("std_errors", [])], dtype=float
            ),
            marginal_loglik=float(payload.get("marginal_loglik", float("nan"))),
            theta_mode=ThetaMode.parse(payload.get("theta_mode", "profile")),
            method=payload.get("method", "newton"),
            n=int(payload.get("n", 0)),
            n_events=int(payload.get("n_events", 0)),
            data_fingerprint=payload.get("data_fingerprint", ""),
            profile_trace=tuple(tuple(p) for p in payload.get("profile_trace", [])),
        )


def predict_survival(
    fit: FrailtyFit, x: Sequence[float], cluster: str, t: float
) -> Union[float, np.ndarray]:
    """Predicted survival probability of an observation with design row ``x`` in ``cluster``."""
    return fit.predict_survival(x, cluster, t)
