from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from frailz.data.CovariateSchema import CovariateSchema, CovariateSpec, Observation
from frailz.errors import NoEventsError, UnknownClusterError, ValidationError

logger = logging.getLogger("frailz.data")


@dataclass(frozen=True, eq=False)
class SurvivalDataset:
    """
    Immutable column store of clustered right-censored observations.

    Covariates are held raw (floats for numeric, strings for categorical) and
    expanded to a treatment-coded design matrix on demand. ``row_ids`` carries the
    original 1-based row numbers through every subset so outlier reports can name
    cases.
    """

    time: np.ndarray
    status: np.ndarray
    cluster: np.ndarray
    covariates: Mapping[str, np.ndarray]
    schema: CovariateSchema = field(default_factory=CovariateSchema)
    row_ids: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        time = np.asarray(self.time, dtype=float).reshape(-1)
        n = time.shape[0]
        status = np.asarray(self.status).reshape(-1)
        cluster = np.asarray([str(c) for c in np.asarray(self.cluster).reshape(-1)], dtype=object)
        row_ids = (
            np.arange(1, n + 1, dtype=np.int64)
            if self.row_ids is None
            else np.asarray(self.row_ids, dtype=np.int64).reshape(-1)
        )
        if n == 0:
            raise ValidationError("dataset has no observations")
        if status.shape[0] != n or cluster.shape[0] != n or row_ids.shape[0] != n:
            raise ValidationError("time, status, cluster and row_ids must have equal length")
        if not np.all(np.isfinite(time)) or np.any(time <= 0):
            bad = row_ids[~(np.isfinite(time) & (time > 0))]
            raise ValidationError(f"time must be finite and > 0 (rows {bad.tolist()[:10]})")
        if not np.all(np.isin(status, (0, 1))):
            bad = row_ids[~np.isin(status, (0, 1))]
            raise ValidationError(f"status must be 0 or 1 (rows {bad.tolist()[:10]})")
        if len(np.unique(row_ids)) != n:
            raise ValidationError("row_ids must be unique")

        columns: Dict[str, np.ndarray] = {}
        missing = [name for name in self.schema.names if name not in self.covariates]
        if missing:
            raise ValidationError(f"covariates missing from dataset: {missing}")
        for spec in self.schema:
            values = np.asarray(self.covariates[spec.name]).reshape(-1)
            if values.shape[0] != n:
                raise ValidationError(f"covariate {spec.name!r} has wrong length")
            if spec.is_categorical:
                values = np.asarray([str(v) for v in values], dtype=object)
                unknown = sorted(set(values) - set(spec.levels))
                if unknown:
                    raise ValidationError(
                        f"covariate {spec.name!r}: unknown levels {unknown}"
                    )
            else:
                values = values.astype(float)
                if not np.all(np.isfinite(values)):
                    raise ValidationError(f"covariate {spec.name!r} has non-finite values")
            values.setflags(write=False)
            columns[spec.name] = values

        for arr in (time, cluster, row_ids):
            arr.setflags(write=False)
        status = status.astype(np.int8)
        status.setflags(write=False)
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "status", status)
        object.__setattr__(self, "cluster", cluster)
        object.__setattr__(self, "row_ids", row_ids)
        object.__setattr__(self, "covariates", columns)

    # ——— Shape ———

    @property
    def n(self) -> int:
        return int(self.time.shape[0])

    def __len__(self) -> int:
        return self.n

    @property
    def g(self) -> int:
        return len(self.clusters)

    @property
    def n_events(self) -> int:
        return int(self.status.sum())

    @cached_property
    def clusters(self) -> Tuple[str, ...]:
        """Cluster ids in order of first appearance."""
        return tuple(dict.fromkeys(self.cluster.tolist()))

    @cached_property
    def cluster_codes(self) -> np.ndarray:
        lookup = {c: i for i, c in enumerate(self.clusters)}
        codes = np.fromiter((lookup[c] for c in self.cluster), dtype=np.int64, count=self.n)
        codes.setflags(write=False)
        return codes

    @cached_property
    def cluster_index(self) -> Dict[str, Tuple[int, ...]]:
        index: Dict[str, List[int]] = {c: [] for c in self.clusters}
        for pos, c in enumerate(self.cluster):
            index[c].append(pos)
        return {c: tuple(positions) for c, positions in index.items()}

    @cached_property
    def cluster_events(self) -> np.ndarray:
        """Event count D_i per cluster, aligned with ``clusters``."""
        return np.bincount(self.cluster_codes, weights=self.status, minlength=self.g)

    @cached_property
    def positions(self) -> Dict[int, int]:
        return {int(r): i for i, r in enumerate(self.row_ids)}

    def require_events(self) -> None:
        if self.n_events == 0:
            raise NoEventsError("dataset has no events (every observation is censored)")

    # ——— Covariates ———

    @property
    def columns(self) -> Tuple[str, ...]:
        return self.schema.columns

    @cached_property
    def design(self) -> np.ndarray:
        """Treatment-coded design matrix, one column per entry of ``columns``."""
        blocks = []
        for spec in self.schema:
            values = self.covariates[spec.name]
            if spec.is_categorical:
                for level in spec.indicator_levels:
                    blocks.append((values == level).astype(float))
            else:
                blocks.append(values.astype(float))
        if not blocks:
            x = np.zeros((self.n, 0))
        else:
            x = np.column_stack(blocks)
        x.setflags(write=False)
        return x

    def design_matrix(self) -> np.ndarray:
        return self.design

    def expand(self, values: Sequence) -> np.ndarray:
        """Expand one raw covariate tuple to its design row."""
        if len(values) != len(self.schema):
            raise ValidationError(
                f"expected {len(self.schema)} covariate values, got {len(values)}"
            )
        row: List[float] = []
        for spec, value in zip(self.schema, values):
            if spec.is_categorical:
                if str(value) not in spec.levels:
                    raise ValidationError(f"covariate {spec.name!r}: unknown level {value!r}")
                row.extend(float(str(value) == level) for level in spec.indicator_levels)
            else:
                row.append(float(value))
        return np.asarray(row, dtype=float)

    def map_covariate(
        self, name: str, func: Callable[[np.ndarray], np.ndarray], new_name: Optional[str] = None
    ) -> "SurvivalDataset":
        """Return a copy with numeric covariate ``name`` transformed by ``func``."""
        spec = self.schema[name]
        if spec.is_categorical:
            raise ValidationError(f"cannot transform categorical covariate {name!r}")
        target = new_name or name
        values = np.asarray(func(self.covariates[name]), dtype=float)
        covariates = {k: v for k, v in self.covariates.items() if k != name}
        covariates[target] = values
        schema = self.schema.replace(name, CovariateSpec.numeric(target))
        return SurvivalDataset(
            self.time, self.status, self.cluster, covariates, schema, self.row_ids
        )

    # ——— Subsets ———

    def subset(self, selector) -> "SurvivalDataset":
        """Rows selected by a boolean mask or an integer position array."""
        idx = np.asarray(selector)
        if idx.dtype == bool:
            if idx.shape[0] != self.n:
                raise ValidationError("mask length does not match dataset")
            idx = np.flatnonzero(idx)
        return SurvivalDataset(
            self.time[idx],
            self.status[idx],
            self.cluster[idx],
            {k: v[idx] for k, v in self.covariates.items()},
            self.schema,
            self.row_ids[idx],
        )

    def drop_rows(self, row_ids: Iterable[int]) -> "SurvivalDataset":
        drop = {int(r) for r in row_ids}
        unknown = drop - set(self.positions)
        if unknown:
            raise ValidationError(f"unknown row ids: {sorted(unknown)}")
        return self.subset(~np.isin(self.row_ids, list(drop)))

    def observation(self, pos: int) -> Observation:
        return Observation(
            time=float(self.time[pos]),
            status=int(self.status[pos]),
            cluster=str(self.cluster[pos]),
            covariates=tuple(
                self.covariates[spec.name][pos]
                if spec.is_categorical
                else float(self.covariates[spec.name][pos])
                for spec in self.schema
            ),
            row_id=int(self.row_ids[pos]),
        )

    @property
    def observations(self) -> List[Observation]:
        return [self.observation(i) for i in range(self.n)]

    @classmethod
    def from_observations(
        cls, observations: Sequence[Observation], schema: CovariateSchema
    ) -> "SurvivalDataset":
        if not observations:
            raise ValidationError("no observations")
        for obs in observations:
            if len(obs.covariates) != len(schema):
                raise ValidationError(
                    f"row {obs.row_id}: covariate vector length {len(obs.covariates)} "
                    f"does not match schema length {len(schema)}"
                )
        row_ids = [obs.row_id or i + 1 for i, obs in enumerate(observations)]
        return cls(
            time=[obs.time for obs in observations],
            status=[obs.status for obs in observations],
            cluster=[obs.cluster for obs in observations],
            covariates={
                spec.name: [obs.covariates[j] for obs in observations]
                for j, spec in enumerate(schema)
            },
            schema=schema,
            row_ids=row_ids,
        )

    def cluster_code(self, cluster: str) -> int:
        try:
            return self.clusters.index(str(cluster))
        except ValueError:
            raise UnknownClusterError(f"unknown cluster {cluster!r}") from None

    def fingerprint(self) -> str:
        """Content digest of the dataset (values, clusters, row ids and schema)."""
        h = hashlib.sha256()
        h.update(self.time.tobytes())
        h.update(self.status.tobytes())
        h.update(self.row_ids.tobytes())
        h.update("\x1f".join(self.cluster.tolist()).encode())
        for spec in self.schema:
            h.update(spec.name.encode())
            values = self.covariates[spec.name]
            if spec.is_categorical:
                h.update("\x1f".join(values.tolist()).encode())
            else:
                h.update(values.tobytes())
        return h.hexdigest()


def censoring_rate(data: SurvivalDataset) -> float:
    """Fraction of observations with status 0."""
    return float(1.0 - data.status.mean())
