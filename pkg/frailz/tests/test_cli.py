import json
import logging
import time
from argparse import Namespace

import pandas as pd
import pytest

from frailz.__main__ import main
from frailz.constants import THREADS_ENV
from frailz.errors import ConfigError
from frailz.model.FrailtyFit import FrailtyFit
from frailz.utils.Defaults import Defaults
from frailz.utils.logging import HANDLER_NAME, configure_logging
from frailz.utils.utils import derive_seed, parallel_map, parse_rows, resolve_threads

KIDNEY_FLAGS = [
    "--time-col", "Time",
    "--status-col", "Status",
    "--cluster-col", "ID",
    "--numeric", "Age",
    "--categorical", "Sex=Female,Male",
    "--categorical", "Disease=Other,GN,AN,PKD",
]


def _manifest(out_dir):
    return json.loads((out_dir / "manifest.json").read_text(encoding="utf-8"))


def _run(out_dir, *argv) -> int:
    return main(["-q", "--out", str(out_dir), *argv])


def test_dataset_export_round_trips(out_dir):
    assert _run(out_dir, "dataset") == 0
    lines = (out_dir / "kidney.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "ID,Time,Status,Age,Sex,Disease"
    assert len(lines) == 77
    assert _manifest(out_dir)["outputs"] == ["kidney.csv"]

    fit_dir = out_dir / "fit"
    code = _run(fit_dir, "fit", "--data", str(out_dir / "kidney.csv"), *KIDNEY_FLAGS)
    assert code == 0
    fit = FrailtyFit.from_dict(json.loads((fit_dir / "fit.json").read_text(encoding="utf-8")))
    assert fit.converged
    assert fit.columns == ("Age", "Sex:Male", "Disease:GN", "Disease:AN", "Disease:PKD")
    table = pd.read_csv(fit_dir / "coefficients.csv")
    assert list(table["covariate"]) == list(fit.columns)
    manifest = _manifest(fit_dir)
    assert manifest["outputs"] == ["fit.json", "coefficients.csv"]
    assert str(out_dir / "kidney.csv") in manifest["inputs"]


def test_fit_on_embedded_kidney(out_dir):
    assert _run(out_dir, "fit", "--theta", "none") == 0
    payload = json.loads((out_dir / "fit.json").read_text(encoding="utf-8"))
    assert payload["theta"] == 0.0


def test_fit_without_events_exits_2(tmp_path, out_dir):
    path = tmp_path / "censored.csv"
    path.write_text(
        "time,status,cluster,x\n1,0,a,0.1\n2,0,a,0.4\n3,0,b,0.2\n4,0,b,0.9\n", encoding="utf-8"
    )
    assert _run(out_dir, "fit", "--data", str(path), "--numeric", "x") == 2


def test_missing_data_file_exits_2(tmp_path, out_dir):
    assert _run(out_dir, "fit", "--data", str(tmp_path / "nothing.csv")) == 2


def test_folds_command(out_dir):
    assert _run(out_dir, "--seed", "4", "folds", "--cv", "kfold:5") == 0
    frame = pd.read_csv(out_dir / "folds.csv", keep_default_na=False)
    assert list(frame.columns) == ["row_id", "fold", "na_reason"]
    assert len(frame) == 76
    assert set(frame.loc[frame["fold"] != "NA", "fold"].astype(int)) <= set(range(5))
    seeds = _manifest(out_dir)["seeds"]
    assert seeds["seed"] == 4
    assert seeds["fold_seed"] == derive_seed(4, 1)


def test_folds_needs_a_cv_regime(out_dir):
    assert _run(out_dir, "folds", "--cv", "none") == 2


ZRESID_FILES = {
    "residuals.csv",
    "diagnostics.json",
    "outlier_frequency.csv",
    "scatter.svg",
    "scatter.csv",
    "qq.svg",
    "qq.csv",
    "replicated_sw.svg",
    "replicated_sw.csv",
    "cs_chf.svg",
    "cs_chf.csv",
}


def test_zresid_nocv_writes_every_artifact(out_dir, tmp_path):
    assert _run(out_dir, "--seed", "11", "zresid", "-r", "5", "--theta", "none") == 0
    written = {p.name for p in out_dir.iterdir()}
    assert ZRESID_FILES | {"manifest.json"} <= written
    assert set(_manifest(out_dir)["outputs"]) == ZRESID_FILES

    diagnostics = json.loads((out_dir / "diagnostics.json").read_text(encoding="utf-8"))
    assert diagnostics["regime"] == "nocv"
    assert diagnostics["seed"] == 11
    assert diagnostics["n_used"] == 76
    assert diagnostics["replicated_sw"]["replicates"] == 5
    assert len(pd.read_csv(out_dir / "replicated_sw.csv")) == 5

    again = tmp_path / "again"
    assert _run(again, "--seed", "11", "zresid", "-r", "5", "--theta", "none") == 0
    assert (again / "residuals.csv").read_bytes() == (out_dir / "residuals.csv").read_bytes()


def test_zresid_kfold(out_dir):
    code = _run(
        out_dir, "--threads", "2", "zresid", "--cv", "kfold:5", "--theta", "fixed:0.5", "-r", "2"
    )
    assert code == 0
    frame = pd.read_csv(out_dir / "residuals.csv", keep_default_na=False)
    assert set(frame["regime"]) == {"kfold:5"}
    assert len(frame) == 76


def test_zresid_rejects_single_fold(out_dir):
    with pytest.raises(SystemExit) as info:
        main(["--out", str(out_dir), "zresid", "--cv", "kfold:1"])
    assert info.value.code == 2


def test_config_file_seeds_the_run(tmp_path, out_dir):
    config = tmp_path / "run.toml"
    config.write_text('seed = 7\nreplicates = 2\ntheta = "none"\n', encoding="utf-8")
    assert _run(out_dir, "--config", str(config), "zresid") == 0
    manifest = _manifest(out_dir)
    assert manifest["seeds"]["seed"] == 7
    assert manifest["seeds"]["replicate_seeds"] == [7, 8]
    assert str(config) in manifest["inputs"]


def test_simulate_needs_a_config(out_dir):
    assert _run(out_dir, "simulate") == 2


def test_simulate_small_study(tmp_path, out_dir):
    config = tmp_path / "sim.toml"
    config.write_text(
        "\n".join(
            [
                'scenario = "nonlinear"',
                "g = 3",
                "m = 8",
                "replicates = 1",
                "seed = 4",
                'regimes = ["none"]',
                'theta = "fixed:0.5"',
            ]
        )
        + "\n",
        encoding="utf-8",
    )
    assert _run(out_dir, "--config", str(config), "simulate") == 0
    table = pd.read_csv(out_dir / "experiment.csv")
    assert set(table["regime"]) == {"No-CV"}
    assert set(table["n"]) == {24}
    assert (out_dir / "rejection_rate.svg").exists()
    assert len(pd.read_csv(out_dir / "replicates.csv")) == 2
    assert _manifest(out_dir)["seeds"]["seed"] == 4


def test_defaults_precedence(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "2")
    empty = Namespace(seed=None, threads=None)
    assert Defaults(args=empty).threads == 2
    assert Defaults(args=empty, config={"threads": 3, "seed": 5}).threads == 3
    assert Defaults(args=empty, config={"seed": 5}).seed == 5
    assert Defaults(args=Namespace(seed=9, threads=4), config={"seed": 5, "threads": 3}).seed == 9
    assert Defaults(args=Namespace(seed=9, threads=4)).threads == 4
    assert Defaults(args=empty).seed == 1


@pytest.mark.parametrize(
    "config", [{"seed": -1}, {"threshold": 0}, {"theta": "sometimes"}, {"replicates": 0}]
)
def test_defaults_reject_bad_values(config):
    defaults = Defaults(args=Namespace(), config=config)
    with pytest.raises(ConfigError):
        defaults.snapshot()


def test_snapshot_records_run_settings():
    defaults = Defaults(args=Namespace(seed=3, threads=2), config={"theta": "fixed:0.5"})
    assert defaults.snapshot() == {
        "seed": 3,
        "threads": 2,
        "threshold": 3.0,
        "replicates": 100,
        "theta": "fixed:0.5",
    }


def test_bad_thread_environment(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(ConfigError):
        resolve_threads()
    monkeypatch.setenv(THREADS_ENV, "0")
    with pytest.raises(ConfigError):
        resolve_threads()


def test_parse_rows():
    assert parse_rows("20,42") == [20, 42]
    assert parse_rows(None) == []


def test_derive_seed():
    assert derive_seed(1, 2) == derive_seed(1, 2)
    assert derive_seed(1, 2) != derive_seed(2, 1)
    assert 0 <= derive_seed(3) < 2**63


def test_parallel_map_keeps_input_order():
    def slow_identity(i):
        time.sleep(0.01 * (5 - i))
        return i * i

    assert parallel_map(slow_identity, range(5), workers=4) == [0, 1, 4, 9, 16]


def test_configure_logging_keeps_a_single_handler():
    logger = configure_logging(debug=True)
    logger = configure_logging(quiet=True)
    ours = [h for h in logger.handlers if h.get_name() == HANDLER_NAME]
    assert len(ours) == 1
    assert logger.name == "frailz"
    assert logger.level == logging.WARNING
    assert "threadName" not in ours[0].formatter._fmt
    assert configure_logging(debug=True).level == logging.DEBUG
    configure_logging()
