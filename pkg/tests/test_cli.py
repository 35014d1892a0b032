"""
Тесты командной строки
"""

import pytest

from models import Verdict
from records.record_manager import RECORD_FILE
from cli import build_parser, exit_code, main
from cli.main import EXIT_CONFIG, EXIT_INCONCLUSIVE, EXIT_NO_INPUT, EXIT_PASS

SDE_TOML = """
kind = "sde-run"
seed = 3

[kernel]
dimension = 1
fourier_cutoff = 16

[sde_run]
n = 4
steps = 5
dt = 0.001
eps_reg = 0.01
snapshot_every = 2
"""


@pytest.fixture
def sde_config(tmp_path):
    path = tmp_path / "sde.toml"
    path.write_text(SDE_TOML, encoding="utf-8")
    return path


def test_exit_codes():
    assert exit_code(Verdict.PASS) == 0
    assert exit_code(Verdict.FAIL) == 2
    assert exit_code(Verdict.INCONCLUSIVE) == 3


def test_parser_has_a_subcommand_per_kind():
    args = build_parser().parse_args(["zsweep", "--seed", "4", "--workers", "2"])
    assert (args.command, args.seed, args.workers) == ("zsweep", 4, 2)
    assert build_parser().parse_args(["report", "out"]).command == "report"


def test_sde_run_end_to_end(tmp_path, sde_config, capsys):
    out = tmp_path / "out"
    assert main(["sde-run", "--config", str(sde_config), "--out", str(out), "--dump", "-q"]) == EXIT_PASS
    (directory,) = [p for p in out.iterdir() if p.is_dir()]
    assert directory.name.startswith("sde-run-")
    for name in (RECORD_FILE, "final_positions.csv", "snapshots.csv", "run.log"):
        assert (directory / name).exists()
    assert "overall: pass" in capsys.readouterr().out


def test_results_do_not_depend_on_workers(tmp_path, sde_config):
    main(["sde-run", "--config", str(sde_config), "--out", str(tmp_path / "one"), "--workers", "1", "-q"])
    main(["sde-run", "--config", str(sde_config), "--out", str(tmp_path / "four"), "--workers", "4", "-q"])
    (one,) = (tmp_path / "one").iterdir()
    (four,) = (tmp_path / "four").iterdir()
    assert (one / "final_positions.csv").read_bytes() == (four / "final_positions.csv").read_bytes()


def test_invalid_config_creates_no_directory(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text('kind = "sde-run"\n[sde_run]\nn = 0\n', encoding="utf-8")
    out = tmp_path / "out"
    assert main(["sde-run", "--config", str(path), "--out", str(out), "-q"]) == EXIT_CONFIG
    assert not out.exists()


def test_report_on_empty_directory(tmp_path):
    assert main(["report", str(tmp_path), "-q"]) == EXIT_NO_INPUT
    assert main(["report", str(tmp_path / "missing"), "-q"]) == EXIT_NO_INPUT


def test_report_with_corrupted_record(tmp_path, sde_config):
    out = tmp_path / "out"
    main(["sde-run", "--config", str(sde_config), "--out", str(out), "-q"])
    broken = out / "broken"
    broken.mkdir()
    (broken / RECORD_FILE).write_text("[]", encoding="utf-8")
    assert main(["report", str(out), "-q"]) == EXIT_INCONCLUSIVE
    assert (out / "report.json").exists()


def test_report_passes_on_clean_records(tmp_path, sde_config):
    out = tmp_path / "out"
    main(["sde-run", "--config", str(sde_config), "--out", str(out), "-q"])
    assert main(["report", str(out), "-q"]) == EXIT_PASS
