"""
Тесты записей прогонов и сводного отчета
"""

import json

import numpy as np
import pandas as pd
import pytest

from models import ExperimentConfig, ExperimentKind, Verdict
from records import RecordManager, ReportBuilder, canonical_json, to_jsonable
from records.record_manager import CONFIG_FILE, RECORD_FILE, SUMMARY_FILE, TEXT_SUMMARY_FILE


def _config(tmp_path, kind=ExperimentKind.ZSWEEP, seed=1) -> ExperimentConfig:
    return ExperimentConfig(kind=kind, seed=seed, output_dir=str(tmp_path),
                            kernel={"dimension": 1, "fourier_cutoff": 16})


def _partition_table() -> pd.DataFrame:
    return pd.DataFrame({"N": [2, 4, 2, 4], "beta": [1.0, 1.0, 2.0, 2.0], "mean": [1.1, 1.2, 1.3, 1.5],
                         "ci": [0.01, 0.02, 0.03, 0.04]})


def _write(manager: RecordManager, config: ExperimentConfig, verdicts) -> tuple:
    directory = manager.prepare_directory(config)
    record = manager.write_record(directory, config, config.kernel.to_kernel(), {"partition": _partition_table()},
                                  {"max_mean": np.float64(1.5)}, verdicts, 0.25)
    return directory, record


def test_jsonable_conversion():
    payload = {"a": np.arange(3), "b": np.float32(0.5), "c": Verdict.PASS, 1: (np.int64(2),)}
    assert to_jsonable(payload) == {"a": [0, 1, 2], "b": 0.5, "c": "pass", "1": [2]}
    assert canonical_json({"b": 1, "a": 2}) == '{"a":2,"b":1}'


def test_run_directory_layout(tmp_path):
    manager = RecordManager()
    config = _config(tmp_path)
    directory, record = _write(manager, config, {"trend": Verdict.PASS})
    assert directory.name == f"zsweep-{RecordManager.config_hash(config)[:8]}"
    for name in (CONFIG_FILE, RECORD_FILE, SUMMARY_FILE, TEXT_SUMMARY_FILE, "partition.csv"):
        assert (directory / name).exists()
    loaded = json.loads((directory / RECORD_FILE).read_text())
    assert loaded["verdicts"] == {"trend": "pass"}
    assert record.data_files == ["partition.csv", SUMMARY_FILE]
    assert "overall: pass" in (directory / TEXT_SUMMARY_FILE).read_text()


def test_tables_are_byte_stable(tmp_path):
    manager = RecordManager()
    first, _ = _write(manager, _config(tmp_path / "a"), {})
    second, _ = _write(manager, _config(tmp_path / "b"), {})
    assert (first / "partition.csv").read_bytes() == (second / "partition.csv").read_bytes()


def test_hashes_depend_on_content(tmp_path):
    assert RecordManager.config_hash(_config(tmp_path, seed=1)) != RecordManager.config_hash(_config(tmp_path, seed=2))
    kernel = _config(tmp_path).kernel.to_kernel()
    assert len(RecordManager.kernel_hash(kernel)) == 64


def test_artifact_version_is_nonempty():
    assert RecordManager.artifact_version()


def test_corrupted_records_are_skipped(tmp_path):
    manager = RecordManager()
    _write(manager, _config(tmp_path), {"trend": Verdict.PASS})
    broken = tmp_path / "broken"
    broken.mkdir()
    (broken / RECORD_FILE).write_text("{not json", encoding="utf-8")
    records, skipped = manager.load_records(tmp_path)
    assert len(records) == 1
    assert skipped == [broken / RECORD_FILE]


def test_report_groups_and_plot_data(tmp_path):
    manager = RecordManager()
    _write(manager, _config(tmp_path, seed=1), {"trend": Verdict.PASS})
    _write(manager, _config(tmp_path, seed=2), {"trend": Verdict.INCONCLUSIVE})
    builder = ReportBuilder(manager)
    report, skipped = builder.build_report(tmp_path)
    assert skipped == []
    assert report["records"] == 2
    assert report["overall"] == "inconclusive"
    assert len(report["kernels"]) == 1
    assert len(next(iter(report["kernels"].values()))) == 2
    section = next(iter(report["sections"].values()))
    assert len(section["plot_data"]) == 2
    assert all(p.startswith("plot_data/") for p in section["plot_data"])
    series = pd.read_csv(tmp_path / section["plot_data"][0])
    assert list(series.columns) == ["x", "y", "ci"]
    path = builder.write_report(report, tmp_path)
    assert json.loads(path.read_text())["records"] == 2


def test_empty_directory_report(tmp_path):
    report, skipped = ReportBuilder().build_report(tmp_path)
    assert report["records"] == 0
    assert report["overall"] == "inconclusive"
    assert skipped == []


def test_missing_table_is_none(tmp_path):
    assert RecordManager.load_table(tmp_path, "absent") is None


@pytest.mark.parametrize("kind", [ExperimentKind.SDE_RUN, ExperimentKind.MV_SOLVE])
def test_kinds_without_fits_have_no_plot_data(tmp_path, kind):
    manager = RecordManager()
    _write(manager, _config(tmp_path, kind=kind), {"in_domain": Verdict.PASS})
    report, _ = ReportBuilder(manager).build_report(tmp_path)
    assert all(not s["plot_data"] for s in report["sections"].values())
