"""
Менеджер записей экспериментов: хеш конфигурации, каталог прогона, артефакты
"""

from typing import Any, Dict, List, Optional, Tuple
import hashlib
import json
import logging
import subprocess

import numpy as np
import pandas as pd
from pydantic import ValidationError

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import ExperimentConfig, ExperimentRecord, Kernel, Verdict

logger = logging.getLogger(__name__)

PACKAGE_VERSION = "0.1.0"
FLOAT_FORMAT = "%.12g"
RECORD_FILE = "record.json"
CONFIG_FILE = "config.resolved.json"
SUMMARY_FILE = "summary.json"
TEXT_SUMMARY_FILE = "summary.txt"
LOG_FILE = "run.log"


def to_jsonable(value: Any) -> Any:
    """Приведение numpy-значений к типам JSON"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Verdict):
        return value.value
    return value


def canonical_json(payload: Any) -> str:
    """JSON с отсортированными ключами без пробелов"""
    return json.dumps(to_jsonable(payload), sort_keys=True, separators=(",", ":"))


class RecordManager:
    """Менеджер записей прогонов"""

    def __init__(self, output_root: Optional[str] = None):
        """
        Инициализация менеджера записей

        Args:
            output_root: Корневой каталог результатов (по умолчанию output_dir конфигурации)
        """
        self.output_root = Path(output_root) if output_root else None

    # Идентификация

    @staticmethod
    def config_hash(config: ExperimentConfig) -> str:
        """sha256 канонического JSON; каталог результатов в хеш не входит"""
        payload = config.model_dump(mode="json", exclude={"output_dir"})
        return hashlib.sha256(canonical_json(payload).encode()).hexdigest()

    @staticmethod
    def kernel_hash(kernel: Kernel) -> str:
        """sha256 спецификации ядра для перекрестных ссылок в отчете"""
        return hashlib.sha256(canonical_json(kernel.spec_hash_payload()).encode()).hexdigest()

    @staticmethod
    def artifact_version() -> str:
        """Версия в стиле git describe; вне репозитория - версия пакета"""
        root = Path(__file__).parent.parent
        try:
            result = subprocess.run(["git", "describe", "--tags", "--always", "--dirty"], cwd=root,
                                    capture_output=True, text=True, timeout=5, check=True)
            described = result.stdout.strip()
            if described:
                return described
        except (OSError, subprocess.SubprocessError):
            pass
        return f"v{PACKAGE_VERSION}"

    def run_directory(self, config: ExperimentConfig) -> Path:
        """<out>/<kind>-<hash[:8]>/"""
        root = self.output_root or Path(config.output_dir)
        return root / f"{config.kind.value}-{self.config_hash(config)[:8]}"

    # Запись

    def prepare_directory(self, config: ExperimentConfig) -> Path:
        """Создание каталога прогона и эхо разрешенной конфигурации"""
        directory = self.run_directory(config)
        directory.mkdir(parents=True, exist_ok=True)
        echo = json.dumps(config.model_dump(mode="json"), indent=2, sort_keys=True)
        (directory / CONFIG_FILE).write_text(echo + "\n", encoding="utf-8")
        logger.info(f"Run directory: {directory}")
        return directory

    def write_record(self, directory: Path, config: ExperimentConfig, kernel: Kernel,
                     tables: Dict[str, pd.DataFrame], summary: Dict[str, Any],
                     verdicts: Dict[str, Verdict], wall_time: float) -> ExperimentRecord:
        """
        Запись таблиц, сводки и record.json

        Args:
            directory: Каталог прогона
            config: Разрешенная конфигурация
            kernel: Ядро эксперимента
            tables: Таблицы данных (имя -> DataFrame)
            summary: Сводка эксперимента
            verdicts: Вердикты проверок
            wall_time: Время выполнения, с

        Returns:
            Запись о прогоне
        """
        try:
            data_files = []
            for name in sorted(tables):
                path = directory / f"{name}.csv"
                tables[name].to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
                data_files.append(path.name)

            summary = to_jsonable(summary)
            (directory / SUMMARY_FILE).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                                  encoding="utf-8")
            data_files.append(SUMMARY_FILE)

            record = ExperimentRecord(
                kind=config.kind, config_hash=self.config_hash(config), kernel_hash=self.kernel_hash(kernel),
                artifact_version=self.artifact_version(), seed=config.seed, workers=config.workers,
                wall_time=wall_time, verdicts=verdicts, data_files=data_files, summary=summary)
            (directory / TEXT_SUMMARY_FILE).write_text(self.render_text(record), encoding="utf-8")
            (directory / RECORD_FILE).write_text(
                json.dumps(record.model_dump(mode="json"), indent=2, sort_keys=True) + "\n", encoding="utf-8")
            logger.info(f"Record written: {directory / RECORD_FILE}, overall {record.overall().value}")
            return record

        except Exception as e:
            logger.error(f"Error writing record to {directory}: {e}")
            raise

    @staticmethod
    def render_text(record: ExperimentRecord) -> str:
        """Человекочитаемая сводка прогона"""
        lines = [
            f"{record.kind.value} {record.config_hash[:8]} ({record.artifact_version})",
            f"seed {record.seed}, workers {record.workers}, wall time {record.wall_time:.2f} s",
            f"overall: {record.overall().value}",
        ]
        lines += [f"  {name}: {verdict.value}" for name, verdict in sorted(record.verdicts.items())]
        lines += [f"  data: {name}" for name in record.data_files]
        return "\n".join(lines) + "\n"

    # Чтение

    def load_records(self, root: Path) -> Tuple[List[Tuple[Path, ExperimentRecord]], List[Path]]:
        """
        Рекурсивный поиск record.json

        Args:
            root: Каталог результатов

        Returns:
            Пары (каталог, запись) и список пропущенных поврежденных файлов
        """
        records, skipped = [], []
        for path in sorted(Path(root).rglob(RECORD_FILE)):
            try:
                record = ExperimentRecord.model_validate_json(path.read_text(encoding="utf-8"))
                records.append((path.parent, record))
            except (ValidationError, ValueError, OSError) as e:
                logger.warning(f"Skipping corrupted record {path}: {e}")
                skipped.append(path)
        logger.info(f"Loaded {len(records)} records from {root}, skipped {len(skipped)}")
        return records, skipped

    @staticmethod
    def load_table(directory: Path, name: str) -> Optional[pd.DataFrame]:
        """Таблица прогона или None, если файла нет"""
        path = Path(directory) / f"{name}.csv"
        if not path.exists():
            return None
        return pd.read_csv(path)
