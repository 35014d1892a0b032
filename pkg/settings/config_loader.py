"""
Загрузчик конфигурации экспериментов: TOML/JSON, строгая схема, переопределения
"""

from typing import Any, Dict, Mapping, Optional
import json
import logging
import os
import re

from pydantic import ValidationError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import ExperimentConfig, ConfigParseError

logger = logging.getLogger(__name__)

WORKERS_ENV = "LOGGAS_WORKERS"
_TOML_POSITION = re.compile(r"line (\d+), column (\d+)")


class ConfigLoader:
    """Загрузчик и валидатор конфигурации"""

    def __init__(self, environ: Optional[Mapping[str, str]] = None):
        """
        Инициализация загрузчика

        Args:
            environ: Переменные окружения (по умолчанию os.environ)
        """
        self.environ = os.environ if environ is None else environ

    def load(self, path: Optional[Path], kind: Optional[str] = None, seed: Optional[int] = None,
             workers: Optional[int] = None, output_dir: Optional[str] = None) -> ExperimentConfig:
        """
        Разбор, валидация и переопределения: CLI > окружение > файл

        Args:
            path: Файл .toml или .json (None: значения по умолчанию)
            kind: Вид эксперимента из подкоманды
            seed: Переопределение seed
            workers: Переопределение числа исполнителей
            output_dir: Переопределение каталога результатов

        Returns:
            Разрешенная конфигурация
        """
        source = str(path) if path is not None else "<defaults>"
        data = self.parse_file(Path(path)) if path is not None else {}
        if kind is not None:
            if data.get("kind", kind) != kind:
                raise ConfigParseError(f"config kind '{data['kind']}' does not match subcommand '{kind}'",
                                       source, key_path="kind")
            data.setdefault("kind", kind)
        env_workers = self._env_workers()
        if env_workers is not None:
            data["workers"] = env_workers
        overrides = {"seed": seed, "workers": workers, "output_dir": output_dir}
        data.update({k: v for k, v in overrides.items() if v is not None})
        config = self.validate(data, source)
        logger.info(f"Loaded {config.kind.value} config from {source}: seed {config.seed}, workers {config.workers}")
        return config

    def parse_file(self, path: Path) -> Dict[str, Any]:
        """Разбор текста; синтаксические ошибки несут строку и столбец"""
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigParseError(f"cannot read config: {e.strerror}", str(path)) from e

        suffix = Path(path).suffix.lower()
        if suffix == ".json":
            try:
                data = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigParseError(e.msg, str(path), e.lineno, e.colno) from e
        elif suffix == ".toml":
            try:
                data = tomllib.loads(text)
            except tomllib.TOMLDecodeError as e:
                match = _TOML_POSITION.search(str(e))
                line, column = (int(match.group(1)), int(match.group(2))) if match else (None, None)
                raise ConfigParseError(str(e).split(" (at ")[0], str(path), line, column) from e
        else:
            raise ConfigParseError(f"unsupported config format '{suffix}', expected .toml or .json", str(path))

        if not isinstance(data, dict):
            raise ConfigParseError("top level must be a table", str(path), 1, 1)
        return data

    @staticmethod
    def validate(data: Dict[str, Any], source: str = "<config>") -> ExperimentConfig:
        """Проверка схемы; ошибка указывает путь ключа через точку"""
        try:
            return ExperimentConfig.model_validate(data)
        except ValidationError as e:
            first = e.errors()[0]
            key_path = ".".join(str(part) for part in first["loc"]) or "<root>"
            logger.error(f"Config validation failed at {key_path}: {first['msg']}")
            raise ConfigParseError(first["msg"], source, key_path=key_path) from e

    def _env_workers(self) -> Optional[int]:
        value = self.environ.get(WORKERS_ENV)
        if value is None or value.strip() == "":
            return None
        try:
            return int(value)
        except ValueError as e:
            raise ConfigParseError(f"{WORKERS_ENV} must be an integer, got '{value}'", WORKERS_ENV,
                                   key_path="workers") from e
