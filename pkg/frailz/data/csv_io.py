from __future__ import annotations

import logging
import os
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from frailz.constants import CSV_FLOAT_FORMAT
from frailz.data.CovariateSchema import CovariateSchema
from frailz.data.SurvivalDataset import SurvivalDataset
from frailz.errors import DataValidationError

logger = logging.getLogger("frailz.data")

REQUIRED_FIELDS = ("time", "status", "cluster")


def resolve_column_map(
    schema: CovariateSchema, column_map: Optional[Mapping[str, str]] = None
) -> Dict[str, str]:
    """
    Map logical field names to CSV column names.

    Logical names are ``time``, ``status``, ``cluster``, ``row_id`` and every
    covariate name in the schema; anything not mapped is read from the column of
    the same name.
    """
    resolved = {name: name for name in (*REQUIRED_FIELDS, "row_id", *schema.names)}
    if column_map:
        resolved.update({k: str(v) for k, v in column_map.items()})
    return resolved


def load_csv(
    path: str,
    schema: CovariateSchema,
    column_map: Optional[Mapping[str, str]] = None,
) -> SurvivalDataset:
    """
    Read and validate a clustered survival CSV.

    Args:
        path: UTF-8 CSV file with a header row.
        schema: Covariate schema; categorical values must be declared levels.
        column_map: Logical field -> CSV column overrides (see resolve_column_map).

    Returns:
        A validated SurvivalDataset in file row order. Row ids come from the mapped
        ``row_id`` column when the file has one, otherwise from 1-based data row numbers.

    Raises:
        FileNotFoundError: If the file does not exist.
        DataValidationError: Listing every offending row and column.
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    columns = resolve_column_map(schema, column_map)
    frame = pd.read_csv(
        path, dtype=str, keep_default_na=False, encoding="utf-8", skipinitialspace=True
    )
    source = os.path.basename(path)

    wanted = [columns[k] for k in (*REQUIRED_FIELDS, *schema.names)]
    missing = [c for c in wanted if c not in frame.columns]
    if missing:
        raise DataValidationError([(0, f"missing column {c!r}") for c in missing], source)
    if frame.empty:
        raise DataValidationError([(0, "no data rows")], source)

    issues: List[Tuple[int, str]] = []
    file_rows = np.arange(1, len(frame) + 1)

    def numeric(field: str) -> np.ndarray:
        raw = frame[columns[field]].str.strip()
        values = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=float)
        for row in file_rows[np.isnan(values)]:
            text = raw.iloc[row - 1]
            reason = "missing value" if text == "" else f"not a number: {text!r}"
            issues.append((int(row), f"{columns[field]}: {reason}"))
        return values

    time = numeric("time")
    for row in file_rows[~np.isnan(time) & (time <= 0)]:
        issues.append((int(row), f"{columns['time']}: time must be > 0, got {time[row - 1]:g}"))

    status = numeric("status")
    for row in file_rows[~np.isnan(status) & ~np.isin(status, (0.0, 1.0))]:
        issues.append(
            (int(row), f"{columns['status']}: status must be 0 or 1, got {status[row - 1]:g}")
        )

    cluster = frame[columns["cluster"]].str.strip().to_numpy(dtype=object)
    for row in file_rows[cluster == ""]:
        issues.append((int(row), f"{columns['cluster']}: missing cluster id"))

    covariates: Dict[str, np.ndarray] = {}
    for spec in schema:
        if spec.is_categorical:
            raw = frame[columns[spec.name]].str.strip().to_numpy(dtype=object)
            for row in file_rows[~np.isin(raw, spec.levels)]:
                value = raw[row - 1]
                reason = "missing value" if value == "" else f"unknown level {value!r}"
                issues.append((int(row), f"{columns[spec.name]}: {reason}"))
            covariates[spec.name] = raw
        else:
            covariates[spec.name] = numeric(spec.name)

    row_ids = None
    if columns["row_id"] in frame.columns:
        row_ids = pd.to_numeric(frame[columns["row_id"]], errors="coerce").to_numpy(dtype=float)
        integral = np.isfinite(row_ids) & (row_ids == np.round(row_ids))
        for row in file_rows[~integral]:
            issues.append((int(row), f"{columns['row_id']}: row id must be an integer"))

    if issues:
        issues.sort()
        raise DataValidationError(issues, source)

    data = SurvivalDataset(
        time=time,
        status=status.astype(np.int8),
        cluster=cluster,
        covariates=covariates,
        schema=schema,
        row_ids=None if row_ids is None else row_ids.astype(np.int64),
    )
    logger.debug("Loaded %s: n=%d, g=%d, events=%d", source, data.n, data.g, data.n_events)
    return data


def dataset_frame(
    data: SurvivalDataset,
    column_map: Optional[Mapping[str, str]] = None,
    include_row_id: bool = True,
) -> pd.DataFrame:
    columns = resolve_column_map(data.schema, column_map)
    body: Dict[str, object] = {}
    if include_row_id:
        body[columns["row_id"]] = data.row_ids
    body[columns["cluster"]] = data.cluster
    body[columns["time"]] = data.time
    body[columns["status"]] = data.status.astype(int)
    for spec in data.schema:
        body[columns[spec.name]] = data.covariates[spec.name]
    return pd.DataFrame(body)


def write_csv(
    data: SurvivalDataset,
    path: str,
    column_map: Optional[Mapping[str, str]] = None,
    include_row_id: bool = True,
) -> None:
    """Write a dataset so that load_csv with the same schema and map reads it back."""
    dataset_frame(data, column_map, include_row_id).to_csv(
        path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
    )
