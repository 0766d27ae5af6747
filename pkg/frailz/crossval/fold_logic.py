from __future__ import annotations

import logging
from typing import Dict, List, Tuple

import numpy as np

from frailz.crossval.FoldPlan import NA_FOLD, FoldPlan
from frailz.data.SurvivalDataset import SurvivalDataset
from frailz.errors import FoldPlanError, ValidationError
from frailz.residuals.ResidualSet import Regime

logger = logging.getLogger("frailz.crossval")


class Coverage:
    """
    Representation rules for held-out observations.

    A test observation is valid when its cluster and each of its categorical
    levels still appear in the training set, and when holding it out does not
    strip every event from a cluster or level that has events in the full data.
    Clusters or levels without any event in the full data are tolerated.
    """

    __slots__ = ("status", "groups")

    def __init__(self, data: SurvivalDataset) -> None:
        self.status = data.status.astype(float)
        sizes = np.bincount(data.cluster_codes, minlength=data.g)
        singleton = sizes[data.cluster_codes] == 1
        self.groups: List[Tuple[str, np.ndarray, int, np.ndarray, np.ndarray]] = [
            ("cluster", data.cluster_codes, data.g, data.cluster_events, singleton)
        ]
        for spec in data.schema.categorical:
            lookup = {level: i for i, level in enumerate(spec.levels)}
            codes = np.fromiter(
                (lookup[v] for v in data.covariates[spec.name]), dtype=np.int64, count=data.n
            )
            events = np.bincount(codes, weights=self.status, minlength=len(spec.levels))
            self.groups.append((spec.name, codes, len(spec.levels), events, None))

    def violations(self, test: np.ndarray) -> Dict[int, str]:
        """First broken rule per test position, for one fold's test mask."""
        test_pos = np.flatnonzero(test)
        if test_pos.size == 0:
            return {}
        train = ~test
        is_event = self.status[test_pos] == 1
        out: Dict[int, str] = {}
        for name, codes, size, full_events, singleton in self.groups:
            count = np.bincount(codes[train], minlength=size)
            events = np.bincount(codes[train], weights=self.status[train], minlength=size)
            held = codes[test_pos]
            absent = count[held] == 0
            loses = is_event & (full_events[held] > 0) & (events[held] == 0)
            for pos, gone, lost in zip(test_pos.tolist(), absent, loses):
                if pos in out:
                    continue
                if gone:
                    if singleton is not None:
                        out[pos] = "singleton_cluster" if singleton[pos] else "cluster_absent"
                    else:
                        out[pos] = f"level_absent:{name}"
                elif lost:
                    out[pos] = (
                        "cluster_loses_events" if singleton is not None
                        else f"level_loses_events:{name}"
                    )
        return out


def make_loocv(data: SurvivalDataset) -> FoldPlan:
    """
    Leave-one-out plan: fold i holds out observation i alone. Observations that
    break a representation rule when held out are marked NA.
    """
    if data.n < 2:
        raise ValidationError("LOOCV needs at least two observations")
    coverage = Coverage(data)
    assignment = np.arange(data.n, dtype=np.int64)
    reasons = [""] * data.n
    test = np.zeros(data.n, dtype=bool)
    for pos in range(data.n):
        test[pos] = True
        broken = coverage.violations(test)
        test[pos] = False
        if broken:
            assignment[pos] = NA_FOLD
            reasons[pos] = broken[pos]
    plan = FoldPlan(
        k=data.n,
        assignment=assignment,
        row_ids=data.row_ids,
        regime=Regime("loocv"),
        na_reason=tuple(reasons),
        data_fingerprint=data.fingerprint(),
    )
    logger.debug("LOOCV plan: n=%d, NA=%d", data.n, plan.n_na)
    return plan


def _strata(data: SurvivalDataset) -> Dict[tuple, List[int]]:
    """Positions grouped by (cluster, categorical levels), in first-appearance order."""
    categorical = [data.covariates[spec.name] for spec in data.schema.categorical]
    strata: Dict[tuple, List[int]] = {}
    for pos in range(data.n):
        key = (data.cluster[pos], *(col[pos] for col in categorical))
        strata.setdefault(key, []).append(pos)
    return strata


def make_kfold(data: SurvivalDataset, k: int, seed: int) -> FoldPlan:
    """
    Stratified randomized K-fold plan.

    Within each (cluster, categorical level) stratum observations are shuffled
    with ``seed`` and dealt round-robin across folds, continuing the deal from
    stratum to stratum. Held-out observations that break a representation rule
    are then moved to the least-loaded fold where they and that fold's other test
    observations remain valid; those with no such fold are marked NA.

    Raises:
        ValidationError: If k < 2 or k > n.
        NoEventsError: If the data has no events.
    """
    k = int(k)
    if k < 2:
        raise ValidationError("k must be >= 2")
    if k > data.n:
        raise ValidationError(f"k={k} exceeds the number of observations ({data.n})")
    data.require_events()

    rng = np.random.default_rng(int(seed))
    assignment = np.empty(data.n, dtype=np.int64)
    pointer = 0
    for positions in _strata(data).values():
        for pos in rng.permutation(positions):
            assignment[pos] = pointer % k
            pointer += 1

    coverage = Coverage(data)
    reasons = [""] * data.n
    moved = 0
    for fold in range(k):
        broken = coverage.violations(assignment == fold)
        while broken:
            pos = min(broken)
            if _relocate(coverage, assignment, pos, fold, k):
                moved += 1
            else:
                reasons[pos] = broken[pos]
                assignment[pos] = NA_FOLD
            broken = coverage.violations(assignment == fold)

    plan = FoldPlan(
        k=k,
        assignment=assignment,
        row_ids=data.row_ids,
        regime=Regime("kfold", k),
        seed=int(seed),
        na_reason=tuple(reasons),
        data_fingerprint=data.fingerprint(),
    )
    if moved or plan.n_na:
        logger.debug("K-fold plan (k=%d): %d reassigned, %d NA", k, moved, plan.n_na)
    return plan


def _relocate(
    coverage: Coverage, assignment: np.ndarray, pos: int, fold: int, k: int
) -> bool:
    """
    Move ``pos`` to the least-loaded other fold where it is valid and where it
    breaks nothing that was valid before.
    """
    sizes = np.bincount(assignment[assignment != NA_FOLD], minlength=k)
    for target in sorted((f for f in range(k) if f != fold), key=lambda f: (sizes[f], f)):
        before = coverage.violations(assignment == target)
        assignment[pos] = target
        after = coverage.violations(assignment == target)
        if pos not in after and after.keys() <= before.keys():
            return True
        assignment[pos] = fold
    return False
