from frailz.data.CovariateSchema import CovariateSchema, CovariateSpec, Observation
from frailz.data.SurvivalDataset import SurvivalDataset, censoring_rate
from frailz.data.csv_io import load_csv, write_csv
from frailz.data.kidney import KIDNEY_COLUMNS, KIDNEY_SCHEMA, kidney_dataset

__all__ = [
    "CovariateSchema",
    "CovariateSpec",
    "Observation",
    "SurvivalDataset",
    "censoring_rate",
    "load_csv",
    "write_csv",
    "KIDNEY_COLUMNS",
    "KIDNEY_SCHEMA",
    "kidney_dataset",
]
