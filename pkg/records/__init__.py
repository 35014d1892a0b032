"""
Записи прогонов и сводные отчеты
"""

from .record_manager import RecordManager, canonical_json, to_jsonable
from .report_builder import ReportBuilder

__all__ = [
    'RecordManager',
    'ReportBuilder',
    'canonical_json',
    'to_jsonable',
]
