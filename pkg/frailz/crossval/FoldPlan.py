from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

import numpy as np
import pandas as pd

from frailz.constants import NA_REP
from frailz.data.SurvivalDataset import SurvivalDataset
from frailz.errors import FoldPlanError
from frailz.residuals.ResidualSet import Regime

NA_FOLD = -1


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """
    Assignment of observations to test folds.

    ``assignment[i]`` is the fold in which observation i is held out, or
    ``NA_FOLD`` when no valid fold exists; NA observations stay in every training
    set. A plan with ``k == 1`` trains and tests on the full dataset.
    """

    k: int
    assignment: np.ndarray
    row_ids: np.ndarray
    regime: Regime
    seed: Optional[int] = None
    na_reason: Tuple[str, ...] = ()
    data_fingerprint: str = ""

    def __post_init__(self) -> None:
        assignment = np.asarray(self.assignment, dtype=np.int64).reshape(-1)
        n = assignment.shape[0]
        if len(self.row_ids) != n:
            raise FoldPlanError("assignment and row_ids must have equal length")
        if self.k < 1 or np.any((assignment != NA_FOLD) & ((assignment < 0) | (assignment >= self.k))):
            raise FoldPlanError("fold indices must lie in [0, k)")
        reasons = tuple(self.na_reason) if self.na_reason else ("",) * n
        if len(reasons) != n:
            raise FoldPlanError("na_reason has wrong length")
        if any(bool(r) != (a == NA_FOLD) for r, a in zip(reasons, assignment)):
            raise FoldPlanError("every NA observation needs a reason, and only those")
        assignment.setflags(write=False)
        object.__setattr__(self, "assignment", assignment)
        object.__setattr__(self, "row_ids", np.asarray(self.row_ids, dtype=np.int64))
        object.__setattr__(self, "na_reason", reasons)

    @classmethod
    def resubstitution(cls, data: SurvivalDataset) -> "FoldPlan":
        """Single fold that both trains and tests on every observation."""
        return cls(
            k=1,
            assignment=np.zeros(data.n, dtype=np.int64),
            row_ids=data.row_ids,
            regime=Regime("nocv"),
            data_fingerprint=data.fingerprint(),
        )

    @property
    def n(self) -> int:
        return int(self.assignment.shape[0])

    @property
    def na_mask(self) -> np.ndarray:
        return self.assignment == NA_FOLD

    @property
    def n_na(self) -> int:
        return int(self.na_mask.sum())

    def fold_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment[~self.na_mask], minlength=self.k)

    def test_mask(self, fold: int) -> np.ndarray:
        return self.assignment == fold

    def training_mask(self, fold: int) -> np.ndarray:
        if self.k == 1:
            return np.ones(self.n, dtype=bool)
        return ~self.test_mask(fold)

    def folds(self) -> Iterator[int]:
        """Fold indices with at least one test observation."""
        sizes = self.fold_sizes()
        return (f for f in range(self.k) if sizes[f] > 0)

    def check_matches(self, data: SurvivalDataset) -> None:
        if self.n != data.n or not np.array_equal(self.row_ids, data.row_ids):
            raise FoldPlanError("fold plan was built for a different dataset")
        if self.data_fingerprint and self.data_fingerprint != data.fingerprint():
            raise FoldPlanError("fold plan was built for a different dataset")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "row_id": self.row_ids,
                "fold": pd.array(
                    [None if a == NA_FOLD else int(a) for a in self.assignment], dtype="Int64"
                ),
                "na_reason": [r or NA_REP for r in self.na_reason],
            }
        )

    def to_csv(self, path: str) -> None:
        self.to_frame().to_csv(path, index=False, na_rep=NA_REP, lineterminator="\n")
