"""
Тесты загрузчика конфигурации
"""

import json

import pytest

from models import ConfigParseError, ExperimentKind
from settings import ConfigLoader, WORKERS_ENV
from records import RecordManager

ZSWEEP_TOML = """
kind = "zsweep"
seed = 7
workers = 2

[kernel]
family = "torus-log"
dimension = 1
fourier_cutoff = 32

[measure]
kind = "uniform"

[zsweep]
n_values = [2, 4, 8]
samples = 2000
"""


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_toml_is_loaded(tmp_path):
    config = ConfigLoader(environ={}).load(_write(tmp_path, "z.toml", ZSWEEP_TOML))
    assert config.kind == ExperimentKind.ZSWEEP
    assert config.seed == 7
    assert config.params().n_values == [2, 4, 8]
    assert config.kernel.to_kernel().fourier_cutoff == 32


def test_defaults_without_file():
    config = ConfigLoader(environ={}).load(None, kind="mv-solve")
    assert config.kind == ExperimentKind.MV_SOLVE
    assert config.params().cells == 128


def test_json_syntax_error_has_position(tmp_path):
    path = _write(tmp_path, "bad.json", '{\n  "kind": "zsweep",\n  "seed": ,\n}\n')
    with pytest.raises(ConfigParseError) as excinfo:
        ConfigLoader(environ={}).load(path)
    assert excinfo.value.line == 3
    assert excinfo.value.column == 11
    assert "line 3" in str(excinfo.value)


def test_toml_syntax_error_has_position(tmp_path):
    path = _write(tmp_path, "bad.toml", 'kind = "zsweep"\nseed = = 3\n')
    with pytest.raises(ConfigParseError) as excinfo:
        ConfigLoader(environ={}).load(path)
    assert excinfo.value.line == 2
    assert excinfo.value.column is not None


@pytest.mark.parametrize("text, key_path", [
    ('kind = "zsweep"\n[zsweep]\nsamples = 10\n', "zsweep.samples"),
    ('kind = "zsweep"\n[kernel]\nbogus = 1\n', "kernel.bogus"),
    ('kind = "zsweep"\nworkers = 0\n', "workers"),
])
def test_schema_errors_name_the_key(tmp_path, text, key_path):
    with pytest.raises(ConfigParseError) as excinfo:
        ConfigLoader(environ={}).load(_write(tmp_path, "c.toml", text))
    assert excinfo.value.key_path == key_path


def test_kind_must_match_subcommand(tmp_path):
    with pytest.raises(ConfigParseError) as excinfo:
        ConfigLoader(environ={}).load(_write(tmp_path, "z.toml", ZSWEEP_TOML), kind="gibbs")
    assert excinfo.value.key_path == "kind"


def test_override_precedence(tmp_path):
    path = _write(tmp_path, "z.toml", ZSWEEP_TOML)
    assert ConfigLoader(environ={WORKERS_ENV: "5"}).load(path).workers == 5
    assert ConfigLoader(environ={WORKERS_ENV: "5"}).load(path, workers=3, seed=11).workers == 3
    assert ConfigLoader(environ={WORKERS_ENV: ""}).load(path).workers == 2
    with pytest.raises(ConfigParseError):
        ConfigLoader(environ={WORKERS_ENV: "many"}).load(path)


def test_resolved_config_round_trip(tmp_path):
    loader = ConfigLoader(environ={})
    config = loader.load(_write(tmp_path, "z.toml", ZSWEEP_TOML))
    echoed = _write(tmp_path, "echo.json", json.dumps(config.model_dump(mode="json")))
    again = loader.load(echoed)
    assert again == config
    assert RecordManager.config_hash(again) == RecordManager.config_hash(config)


def test_output_dir_does_not_change_hash(tmp_path):
    loader = ConfigLoader(environ={})
    path = _write(tmp_path, "z.toml", ZSWEEP_TOML)
    assert (RecordManager.config_hash(loader.load(path, output_dir="a"))
            == RecordManager.config_hash(loader.load(path, output_dir="b")))


def test_unsupported_format(tmp_path):
    with pytest.raises(ConfigParseError):
        ConfigLoader(environ={}).load(_write(tmp_path, "c.yaml", "kind: zsweep\n"))
    with pytest.raises(ConfigParseError):
        ConfigLoader(environ={}).load(tmp_path / "missing.toml")
