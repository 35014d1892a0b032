"""
Данные для графиков: столбцы (x, y, ci) по таблицам прогонов
"""

from typing import Callable, Dict, List, Optional
import logging

import numpy as np
import pandas as pd

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import ExperimentKind

logger = logging.getLogger(__name__)

Z_95 = 1.959963984540054

TableLoader = Callable[[str], Optional[pd.DataFrame]]


def _series(x, y, ci) -> pd.DataFrame:
    return pd.DataFrame({"x": np.asarray(x, dtype=float), "y": np.asarray(y, dtype=float),
                         "ci": np.asarray(ci, dtype=float)})


class PlotDataBuilder:
    """Построитель серий для экспериментов с подгонкой наклона"""

    def __init__(self):
        """Инициализация построителя"""
        self._builders: Dict[ExperimentKind, Callable[[TableLoader], Dict[str, pd.DataFrame]]] = {
            ExperimentKind.KERNEL_VERIFY: self._kernel_series,
            ExperimentKind.ZSWEEP: self._partition_series,
            ExperimentKind.MOMENTS_VERIFY: self._moment_series,
            ExperimentKind.MFL_SWEEP: self._modulated_series,
            ExperimentKind.GIBBS: self._entropy_series,
        }

    def build_series(self, kind: ExperimentKind, load: TableLoader) -> Dict[str, pd.DataFrame]:
        """
        Серии графиков для одного прогона

        Args:
            kind: Вид эксперимента
            load: Загрузка таблицы прогона по имени

        Returns:
            Имя серии -> таблица (x, y, ci); пусто для видов без подгонки
        """
        builder = self._builders.get(kind)
        if builder is None:
            return {}
        try:
            return builder(load)
        except Exception as e:
            logger.error(f"Error building plot data for {kind.value}: {e}")
            raise

    def write_series(self, series: Dict[str, pd.DataFrame], directory: Path, prefix: str) -> List[str]:
        """Запись серий в <directory>/<prefix>_<name>.csv"""
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for name in sorted(series):
            path = directory / f"{prefix}_{name}.csv"
            series[name].to_csv(path, index=False, float_format="%.12g", lineterminator="\n")
            written.append(str(path))
        logger.debug(f"Wrote {len(written)} plot series with prefix {prefix}")
        return written

    # Серии по видам

    @staticmethod
    def _kernel_series(load: TableLoader) -> Dict[str, pd.DataFrame]:
        series = {}
        log_bound = load("log_bound")
        if log_bound is not None and "diagonal_ratios" in log_bound:
            series["log_bound_ratio"] = _series(log_bound["eps"], log_bound["diagonal_ratios"], 0.0)
        besov = load("besov")
        if besov is not None and "besov_norms" in besov:
            series["besov_norm"] = _series(besov["eps"], besov["besov_norms"], 0.0)
        return series

    @staticmethod
    def _partition_series(load: TableLoader) -> Dict[str, pd.DataFrame]:
        frame = load("partition")
        if frame is None:
            return {}
        return {f"partition_beta{beta:g}": _series(group["N"], group["mean"], group["ci"])
                for beta, group in frame.groupby("beta", sort=True)}

    @staticmethod
    def _moment_series(load: TableLoader) -> Dict[str, pd.DataFrame]:
        frame = load("scaling")
        if frame is None:
            return {}
        return {"moment_scaling": _series(frame["N"], frame["lhs"], Z_95 * frame["se"])}

    @staticmethod
    def _modulated_series(load: TableLoader) -> Dict[str, pd.DataFrame]:
        frame = load("modulated_energy")
        if frame is None:
            return {}
        return {f"modulated_t{t:g}": _series(group["n"], group["mean"], Z_95 * group["standard_error"])
                for t, group in frame.groupby("t", sort=True)}

    @staticmethod
    def _entropy_series(load: TableLoader) -> Dict[str, pd.DataFrame]:
        frame = load("entropy_rates")
        if frame is None:
            return {}
        return {
            "entropy_forward": _series(frame["n"], frame["h_forward"], Z_95 * frame["h_forward_se"]),
            "entropy_backward": _series(frame["n"], frame["h_backward"], Z_95 * frame["h_backward_se"]),
        }
