"""
Сводный отчет по записям экспериментов
"""

from datetime import datetime
from typing import Any, Dict, List, Tuple
import json
import logging

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import ExperimentRecord, Verdict
from visualization import PlotDataBuilder
from .record_manager import RecordManager, to_jsonable

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"
PLOT_DIR = "plot_data"


class ReportBuilder:
    """Консолидация записей: разделы по прогонам, группы по ядру, данные графиков"""

    def __init__(self, record_manager: RecordManager = None, plot_builder: PlotDataBuilder = None):
        self.record_manager = record_manager or RecordManager()
        self.plot_builder = plot_builder or PlotDataBuilder()

    def build_report(self, root: Path) -> Tuple[Dict[str, Any], List[Path]]:
        """
        Сводный отчет по каталогу результатов

        Args:
            root: Каталог с записями (просматривается рекурсивно)

        Returns:
            Отчет и список пропущенных поврежденных записей
        """
        try:
            root = Path(root)
            records, skipped = self.record_manager.load_records(root)
            sections = {}
            by_kernel: Dict[str, List[str]] = {}
            for directory, record in records:
                name = self._section_name(record)
                series = self.plot_builder.build_series(
                    record.kind, lambda table, d=directory: self.record_manager.load_table(d, table))
                plot_files = self.plot_builder.write_series(series, root / PLOT_DIR, name) if series else []
                sections[name] = self._section(directory, record, root, plot_files)
                by_kernel.setdefault(record.kernel_hash, []).append(name)

            overall = Verdict.combine(record.overall() for _, record in records) if records \
                else Verdict.INCONCLUSIVE
            report = {
                "generated_at": datetime.now().isoformat(timespec="seconds"),
                "records": len(records),
                "skipped": [str(path.relative_to(root)) for path in skipped],
                "overall": overall.value,
                "sections": sections,
                "kernels": {h[:12]: sorted(names) for h, names in sorted(by_kernel.items())},
            }
            logger.info(f"Report built: {len(sections)} sections, {len(by_kernel)} kernel groups")
            return report, skipped

        except Exception as e:
            logger.error(f"Error building report for {root}: {e}")
            raise

    def write_report(self, report: Dict[str, Any], root: Path) -> Path:
        path = Path(root) / REPORT_FILE
        path.write_text(json.dumps(to_jsonable(report), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info(f"Report written: {path}")
        return path

    @staticmethod
    def _section_name(record: ExperimentRecord) -> str:
        return f"{record.kind.value}-{record.config_hash[:8]}"

    @staticmethod
    def _section(directory: Path, record: ExperimentRecord, root: Path, plot_files: List[str]) -> Dict[str, Any]:
        """Раздел отчета для одной записи"""
        return {
            "kind": record.kind.value,
            "directory": str(directory.relative_to(root)),
            "kernel_hash": record.kernel_hash[:12],
            "artifact_version": record.artifact_version,
            "seed": record.seed,
            "workers": record.workers,
            "wall_time": record.wall_time,
            "overall": record.overall().value,
            "verdicts": {k: v.value for k, v in sorted(record.verdicts.items())},
            "summary": record.summary,
            "plot_data": [str(Path(f).relative_to(root)) for f in plot_files],
        }
