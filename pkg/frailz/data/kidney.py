"""
Kidney catheter infection data (McGilchrist and Aisbett, 1991).

38 patients on portable dialysis, two recurrence times each: time to infection at
the catheter insertion point, censored when the catheter was removed for other
reasons. Row order and values follow the published table; rows are the "cases"
that outlier reports name.
"""
from __future__ import annotations

from functools import lru_cache

from frailz.data.CovariateSchema import CovariateSchema, CovariateSpec
from frailz.data.SurvivalDataset import SurvivalDataset

# CSV column names used by the `dataset` export
KIDNEY_COLUMNS = {
    "cluster": "ID",
    "time": "Time",
    "status": "Status",
    "Age": "Age",
    "Sex": "Sex",
    "Disease": "Disease",
}

KIDNEY_SCHEMA = CovariateSchema(
    (
        CovariateSpec.numeric("Age"),
        CovariateSpec.categorical("Sex", ("Female", "Male"), reference="Female"),
        CovariateSpec.categorical("Disease", ("Other", "GN", "AN", "PKD"), reference="Other"),
    )
)

_SEX = {1: "Male", 2: "Female"}

# (patient id, time, status, age, sex code 1=male 2=female, disease)
_ROWS = (
    (1, 8, 1, 28, 1, "Other"),
    (1, 16, 1, 28, 1, "Other"),
    (2, 23, 1, 48, 2, "GN"),
    (2, 13, 0, 48, 2, "GN"),
    (3, 22, 1, 32, 1, "Other"),
    (3, 28, 1, 32, 1, "Other"),
    (4, 447, 1, 31, 2, "Other"),
    (4, 318, 1, 32, 2, "Other"),
    (5, 30, 1, 10, 1, "Other"),
    (5, 12, 1, 10, 1, "Other"),
    (6, 24, 1, 16, 2, "Other"),
    (6, 245, 1, 17, 2, "Other"),
    (7, 7, 1, 51, 1, "GN"),
    (7, 9, 1, 51, 1, "GN"),
    (8, 511, 1, 55, 2, "GN"),
    (8, 30, 1, 56, 2, "GN"),
    (9, 53, 1, 69, 2, "AN"),
    (9, 196, 1, 69, 2, "AN"),
    (10, 15, 1, 51, 1, "GN"),
    (10, 154, 1, 52, 1, "GN"),
    (11, 7, 1, 44, 2, "AN"),
    (11, 333, 1, 44, 2, "AN"),
    (12, 141, 1, 34, 2, "Other"),
    (12, 8, 0, 34, 2, "Other"),
    (13, 96, 1, 35, 2, "AN"),
    (13, 38, 1, 35, 2, "AN"),
    (14, 149, 0, 42, 2, "AN"),
    (14, 70, 0, 42, 2, "AN"),
    (15, 536, 1, 17, 2, "Other"),
    (15, 25, 0, 17, 2, "Other"),
    (16, 17, 1, 60, 1, "AN"),
    (16, 4, 0, 60, 1, "AN"),
    (17, 185, 1, 60, 2, "PKD"),
    (17, 177, 1, 60, 2, "PKD"),
    (18, 292, 1, 43, 2, "Other"),
    (18, 114, 1, 44, 2, "Other"),
    (19, 22, 0, 53, 2, "GN"),
    (19, 159, 0, 53, 2, "GN"),
    (20, 15, 1, 44, 2, "Other"),
    (20, 108, 0, 44, 2, "Other"),
    (21, 152, 1, 46, 1, "PKD"),
    (21, 562, 1, 47, 1, "PKD"),
    (22, 402, 1, 30, 2, "Other"),
    (22, 24, 0, 30, 2, "Other"),
    (23, 13, 1, 62, 2, "AN"),
    (23, 66, 1, 63, 2, "AN"),
    (24, 39, 1, 42, 2, "AN"),
    (24, 46, 0, 43, 2, "AN"),
    (25, 12, 1, 43, 1, "AN"),
    (25, 40, 1, 43, 1, "AN"),
    (26, 113, 0, 57, 2, "AN"),
    (26, 201, 1, 58, 2, "AN"),
    (27, 132, 1, 10, 2, "GN"),
    (27, 156, 1, 10, 2, "GN"),
    (28, 34, 1, 52, 2, "AN"),
    (28, 30, 1, 52, 2, "AN"),
    (29, 2, 1, 53, 1, "GN"),
    (29, 25, 1, 53, 1, "GN"),
    (30, 130, 1, 54, 2, "GN"),
    (30, 26, 1, 54, 2, "GN"),
    (31, 27, 1, 56, 2, "AN"),
    (31, 58, 1, 56, 2, "AN"),
    (32, 5, 0, 50, 2, "GN"),
    (32, 43, 1, 51, 2, "GN"),
    (33, 152, 1, 57, 2, "PKD"),
    (33, 30, 1, 57, 2, "PKD"),
    (34, 190, 1, 44, 2, "GN"),
    (34, 5, 0, 45, 2, "GN"),
    (35, 119, 1, 22, 2, "Other"),
    (35, 8, 1, 22, 2, "Other"),
    (36, 54, 0, 42, 2, "Other"),
    (36, 16, 0, 42, 2, "Other"),
    (37, 6, 0, 52, 2, "PKD"),
    (37, 78, 1, 52, 2, "PKD"),
    (38, 63, 1, 60, 1, "PKD"),
    (38, 8, 0, 60, 1, "PKD"),
)


@lru_cache(maxsize=1)
def kidney_dataset() -> SurvivalDataset:
    """The embedded kidney data: 76 observations in 38 clusters of two."""
    return SurvivalDataset(
        time=[r[1] for r in _ROWS],
        status=[r[2] for r in _ROWS],
        cluster=[str(r[0]) for r in _ROWS],
        covariates={
            "Age": [r[3] for r in _ROWS],
            "Sex": [_SEX[r[4]] for r in _ROWS],
            "Disease": [r[5] for r in _ROWS],
        },
        schema=KIDNEY_SCHEMA,
    )
