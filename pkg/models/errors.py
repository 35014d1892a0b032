"""
Иерархия исключений лаборатории лог-газа
"""

from typing import List, Optional


class LogGasError(Exception):
    """Базовое исключение всех расчетов"""


class DomainError(LogGasError, ValueError):
    """Вычисление вне области определения (диагональ, eps <= 0, совпадающие точки)"""


class ConfigurationError(LogGasError, ValueError):
    """Некорректные параметры расчета или конфигурации эксперимента"""


class UnsupportedConfigurationError(ConfigurationError):
    """Комбинация параметров, которую расчет не поддерживает"""


class EstimationError(LogGasError):
    """Оценка Монте-Карло непригодна (слишком много отброшенных выборок)"""


class InvariantViolationError(LogGasError):
    """Нарушена проверяемая комбинаторная или численная оценка"""


class IntegrationError(LogGasError):
    """Нечисловое состояние при интегрировании СДУ"""

    def __init__(self, message: str, pair_distance: Optional[float] = None):
        super().__init__(message)
        self.pair_distance = pair_distance


class ConvergenceError(LogGasError):
    """Итерация не сошлась за отведенное число шагов"""

    def __init__(self, message: str, residuals: Optional[List[float]] = None):
        super().__init__(message)
        self.residuals = list(residuals or [])


class TuningError(LogGasError):
    """Подстройка шага MALA не привела приемлемость в рабочий диапазон"""

    def __init__(self, message: str, acceptance: float):
        super().__init__(message)
        self.acceptance = acceptance


class ConfigParseError(ConfigurationError):
    """Файл конфигурации не разобран или не прошел схему"""

    def __init__(self, message: str, source: Optional[str] = None, line: Optional[int] = None,
                 column: Optional[int] = None, key_path: Optional[str] = None):
        location = ""
        if line is not None:
            location = f" at line {line}, column {column}"
        elif key_path:
            location = f" at {key_path}"
        super().__init__(f"{source or '<config>'}{location}: {message}")
        self.source = source
        self.line = line
        self.column = column
        self.key_path = key_path
