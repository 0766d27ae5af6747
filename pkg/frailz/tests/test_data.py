import numpy as np
import pytest

from frailz.data.CovariateSchema import CovariateSchema, CovariateSpec, Observation
from frailz.data.SurvivalDataset import SurvivalDataset, censoring_rate
from frailz.data.csv_io import load_csv, write_csv
from frailz.data.kidney import KIDNEY_COLUMNS, KIDNEY_SCHEMA
from frailz.errors import DataValidationError, UnknownClusterError, ValidationError

from conftest import ARM_SCHEMA


def test_kidney_shape(kidney):
    assert kidney.n == 76
    assert kidney.g == 38
    assert kidney.n_events == 58
    assert censoring_rate(kidney) == pytest.approx(18 / 76)
    assert all(len(rows) == 2 for rows in kidney.cluster_index.values())
    # 10 male patients, two rows each
    assert int(kidney.design[:, 1].sum()) == 20


def test_kidney_design_columns(kidney):
    assert kidney.columns == ("Age", "Sex:Male", "Disease:GN", "Disease:AN", "Disease:PKD")
    assert kidney.design.shape == (76, 5)
    # reference levels expand to zeros
    np.testing.assert_array_equal(kidney.expand((30, "Female", "Other")), [30, 0, 0, 0, 0])
    np.testing.assert_array_equal(kidney.expand((30, "Male", "PKD")), [30, 1, 0, 0, 1])


def test_single_row_dataset():
    data = SurvivalDataset(time=[2.0], status=[1], cluster=["a"], covariates={})
    assert (data.n, data.g) == (1, 1)
    assert data.row_ids.tolist() == [1]


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(time=0.0, status=1, cluster="a"),
        dict(time=-1.0, status=1, cluster="a"),
        dict(time=1.0, status=2, cluster="a"),
    ],
)
def test_observation_rejects_invalid_values(kwargs):
    with pytest.raises(ValidationError):
        Observation(**kwargs)


def test_dataset_rejects_invalid_columns():
    with pytest.raises(ValidationError):
        SurvivalDataset(time=[1.0, np.inf], status=[1, 0], cluster=["a", "a"], covariates={})
    with pytest.raises(ValidationError):
        SurvivalDataset(time=[1.0, 2.0], status=[1], cluster=["a", "a"], covariates={})
    with pytest.raises(ValidationError):
        SurvivalDataset(
            time=[1.0, 2.0],
            status=[1, 0],
            cluster=["a", "b"],
            covariates={"x": [0.0, 1.0], "arm": ["A", "Z"]},
            schema=ARM_SCHEMA,
        )


def test_schema_validation():
    with pytest.raises(ValidationError):
        CovariateSpec.categorical("arm", ("A",))
    with pytest.raises(ValidationError):
        CovariateSpec.categorical("arm", ("A", "B"), reference="C")
    with pytest.raises(ValidationError):
        CovariateSchema((CovariateSpec.numeric("x"), CovariateSpec.numeric("x")))
    spec = CovariateSpec.categorical("Disease", ("Other", "GN", "AN"))
    assert spec.reference == "Other"
    assert spec.columns == ("Disease:GN", "Disease:AN")


def test_schema_dict_roundtrip():
    assert CovariateSchema.from_dict(KIDNEY_SCHEMA.to_dict()) == KIDNEY_SCHEMA


def test_from_observations_matches_columns(kidney):
    rebuilt = SurvivalDataset.from_observations(kidney.observations, kidney.schema)
    assert rebuilt.fingerprint() == kidney.fingerprint()


def test_subset_keeps_row_ids(kidney):
    dropped = kidney.drop_rows([20, 42])
    assert dropped.n == 74
    assert 20 not in dropped.row_ids and 42 not in dropped.row_ids
    assert dropped.fingerprint() != kidney.fingerprint()
    part = kidney.subset(kidney.status == 0)
    assert part.n == 18
    assert set(part.row_ids) <= set(kidney.row_ids)


def test_drop_unknown_row(kidney):
    with pytest.raises(ValidationError, match="unknown row ids"):
        kidney.drop_rows([999])


def test_unknown_cluster_is_also_key_error(kidney):
    with pytest.raises(UnknownClusterError):
        kidney.cluster_code("nope")
    with pytest.raises(KeyError):
        kidney.cluster_code("nope")


def test_map_covariate(small_data):
    logged = small_data.map_covariate("x", np.exp, "exp_x")
    assert logged.columns == ("exp_x", "arm:B")
    np.testing.assert_allclose(logged.design[:, 0], np.exp(small_data.design[:, 0]))
    with pytest.raises(ValidationError):
        small_data.map_covariate("arm", np.log)


def test_load_csv_reports_every_bad_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(
        "time,status,cluster,x,arm\n"
        "1.5,1,a,0.1,A\n"
        "-2,1,a,0.2,B\n"
        "3,3,b,0.3,A\n"
        "4,0,b,0.4,C\n"
        "5,1,,zero,A\n",
        encoding="utf-8",
    )
    with pytest.raises(DataValidationError) as info:
        load_csv(str(path), ARM_SCHEMA)
    rows = [row for row, _ in info.value.issues]
    assert rows == [2, 3, 4, 5, 5]
    messages = " ".join(msg for _, msg in info.value.issues)
    assert "time must be > 0" in messages
    assert "unknown level 'C'" in messages
    assert "not a number" in messages


def test_load_csv_rejects_fractional_row_ids(tmp_path):
    path = tmp_path / "ids.csv"
    path.write_text(
        "row_id,time,status,cluster,x,arm\n"
        "1,1,1,a,0.1,A\n"
        "3.7,2,1,a,0.2,B\n"
        "4.0,3,0,b,0.3,A\n"
        "x,4,1,b,0.4,B\n",
        encoding="utf-8",
    )
    with pytest.raises(DataValidationError) as info:
        load_csv(str(path), ARM_SCHEMA)
    assert [row for row, _ in info.value.issues] == [2, 4]
    assert all("row id must be an integer" in msg for _, msg in info.value.issues)


def test_load_csv_missing_column(tmp_path):
    path = tmp_path / "short.csv"
    path.write_text("time,status\n1,1\n", encoding="utf-8")
    with pytest.raises(DataValidationError, match="missing column 'cluster'"):
        load_csv(str(path), CovariateSchema())


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_csv(str(tmp_path / "absent.csv"), CovariateSchema())


def test_load_csv_column_map(tmp_path):
    path = tmp_path / "mapped.csv"
    path.write_text("days,died,centre,x,arm\n3,1,k1,0.5,B\n7,0,k1,-1,A\n", encoding="utf-8")
    data = load_csv(
        str(path), ARM_SCHEMA, {"time": "days", "status": "died", "cluster": "centre"}
    )
    assert data.time.tolist() == [3.0, 7.0]
    assert data.status.tolist() == [1, 0]
    assert data.clusters == ("k1",)
    assert data.design.tolist() == [[0.5, 1.0], [-1.0, 0.0]]


def test_csv_roundtrip_keeps_row_ids(kidney, tmp_path):
    reduced = kidney.drop_rows([20, 42])
    path = tmp_path / "kidney.csv"
    write_csv(reduced, str(path), KIDNEY_COLUMNS)
    again = load_csv(str(path), KIDNEY_SCHEMA, KIDNEY_COLUMNS)
    assert again.fingerprint() == reduced.fingerprint()


def test_csv_without_row_ids_numbers_rows(kidney, tmp_path):
    path = tmp_path / "kidney.csv"
    write_csv(kidney, str(path), KIDNEY_COLUMNS, include_row_id=False)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "ID,Time,Status,Age,Sex,Disease"
    again = load_csv(str(path), KIDNEY_SCHEMA, KIDNEY_COLUMNS)
    assert again.fingerprint() == kidney.fingerprint()
