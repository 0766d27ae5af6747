from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Tuple, Union

import numpy as np
import pandas as pd

from frailz.constants import CSV_FLOAT_FORMAT, CV_PATTERN, NA_REP
from frailz.errors import ValidationError


@dataclass(frozen=True)
class Regime:
    """Residual regime: No-CV, K-fold or leave-one-out."""

    kind: Literal["nocv", "kfold", "loocv"] = "nocv"
    k: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in ("nocv", "kfold", "loocv"):
            raise ValidationError(f"unknown regime {self.kind!r}")
        if self.kind == "kfold":
            if self.k is None or int(self.k) < 2:
                raise ValidationError("K-fold regime needs k >= 2")
            object.__setattr__(self, "k", int(self.k))
        elif self.k is not None:
            raise ValidationError(f"regime {self.kind!r} takes no k")

    @classmethod
    def parse(cls, text: Union[str, "Regime"]) -> "Regime":
        if isinstance(text, Regime):
            return text
        s = str(text).strip().lower()
        if not CV_PATTERN.fullmatch(s):
            raise ValidationError(
                f"invalid regime {text!r}; expected 'none', 'kfold:K' or 'loocv'"
            )
        if s.startswith("kfold:"):
            return cls("kfold", int(s.split(":", 1)[1]))
        return cls("nocv" if s in ("none", "nocv") else s)

    @property
    def is_cv(self) -> bool:
        return self.kind != "nocv"

    @property
    def label(self) -> str:
        if self.kind == "kfold":
            return f"{self.k}-fold"
        return "LOOCV" if self.kind == "loocv" else "No-CV"

    def __str__(self) -> str:
        return f"kfold:{self.k}" if self.kind == "kfold" else self.kind


@dataclass(frozen=True, eq=False)
class ResidualSet:
    """
    Per-observation randomized survival probabilities with their Z and Cox–Snell
    transforms. NA entries are NaN in ``rsp``, ``z`` and ``cs`` and carry a reason.
    """

    row_ids: np.ndarray
    time: np.ndarray
    status: np.ndarray
    cluster: np.ndarray
    rsp: np.ndarray
    z: np.ndarray
    cs: np.ndarray
    regime: Regime
    seed: int
    na_reason: Tuple[str, ...] = ()
    failed_folds: int = 0

    def __post_init__(self) -> None:
        n = len(self.row_ids)
        for name in ("time", "status", "cluster", "rsp", "z", "cs"):
            if len(getattr(self, name)) != n:
                raise ValidationError(f"ResidualSet field {name!r} has wrong length")
        reasons = tuple(self.na_reason) if self.na_reason else ("",) * n
        if len(reasons) != n:
            raise ValidationError("ResidualSet na_reason has wrong length")
        object.__setattr__(self, "na_reason", reasons)

    def __len__(self) -> int:
        return len(self.row_ids)

    @property
    def valid(self) -> np.ndarray:
        return ~np.isnan(self.z)

    @property
    def n_used(self) -> int:
        return int(self.valid.sum())

    def valid_z(self) -> np.ndarray:
        return self.z[self.valid]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "row_id": self.row_ids,
                "time": self.time,
                "status": np.asarray(self.status, dtype=int),
                "cluster": self.cluster,
                "rsp": self.rsp,
                "z": self.z,
                "cs": self.cs,
                "regime": str(self.regime),
                "seed": self.seed,
                "na_reason": [r or NA_REP for r in self.na_reason],
            }
        )

    def to_csv(self, path: str) -> None:
        self.to_frame().to_csv(
            path, index=False, na_rep=NA_REP, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
        )

