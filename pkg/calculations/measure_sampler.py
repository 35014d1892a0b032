"""
Выборка из базовых мер методом псевдонимов (Vose)
"""

from typing import Tuple
import logging

import numpy as np
from scipy import stats

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import BaseMeasure, Configuration, MeasureKind, RandomStream, ConfigurationError

logger = logging.getLogger(__name__)


class AliasTable:
    """Таблица псевдонимов для дискретного распределения, выборка за O(1)"""

    def __init__(self, weights):
        """
        Построение таблицы

        Args:
            weights: Неотрицательные веса (ненормированные вероятности)
        """
        weights = np.asarray(weights, dtype=float).ravel()
        if weights.size == 0 or np.any(weights < 0):
            raise ConfigurationError("alias table needs nonnegative weights")
        total = weights.sum()
        if total <= 0:
            raise ConfigurationError("alias table weights have zero total")
        size = weights.size
        scaled = weights * size / total

        prob = np.ones(size)
        alias = np.arange(size)
        small = [i for i in range(size) if scaled[i] < 1.0]
        large = [i for i in range(size) if scaled[i] >= 1.0]
        while small and large:
            low = small.pop()
            high = large.pop()
            prob[low] = scaled[low]
            alias[low] = high
            scaled[high] -= 1.0 - scaled[low]
            if scaled[high] < 1.0:
                small.append(high)
            else:
                large.append(high)
        # Оставшиеся ячейки заполнены целиком
        self.prob = prob
        self.alias = alias
        self.size = size

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Индексы count независимых выборок"""
        column = rng.integers(0, self.size, size=count)
        coin = rng.random(count)
        return np.where(coin < self.prob[column], column, self.alias[column])


class MeasureSampler:
    """Независимые выборки из ρ̄"""

    def __init__(self):
        self._tables = {}

    def sample(self, measure: BaseMeasure, n: int, stream: RandomStream) -> Configuration:
        """
        n независимых точек из ρ̄

        Args:
            measure: Базовая мера
            n: Число точек, n >= 1
            stream: Поток случайных чисел

        Returns:
            Конфигурация из n точек
        """
        if n < 1:
            raise ConfigurationError(f"sample size must be positive, got {n}")
        points = self.sample_points(measure, n, stream.generator())
        return Configuration(domain=measure.domain, points=points)

    def sample_points(self, measure: BaseMeasure, count: int, rng: np.random.Generator) -> np.ndarray:
        """Массив точек формы (count, d) из генератора rng"""
        d = measure.domain.dimension
        origin, length = measure.domain.box_origin, measure.domain.box_length
        if measure.kind == MeasureKind.UNIFORM:
            points = origin + length * rng.random((count, d))
        elif measure.kind == MeasureKind.GRID:
            flat = self._table(measure).draw(rng, count)
            cell = np.stack(np.unravel_index(flat, measure.density.shape), axis=-1)
            # Равномерный сдвиг внутри ячейки: закон в точности кусочно-постоянный
            points = origin + (cell + rng.random((count, d))) * measure.cell_width
        else:
            index = self._table(measure).draw(rng, count)
            points = measure.atoms[index].copy()
        return measure.domain.wrap(points)

    def sample_indices(self, measure: BaseMeasure, shape: Tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
        """Индексы атомов атомарной меры"""
        if measure.kind != MeasureKind.ATOMIC:
            raise ConfigurationError("atom indices require an atomic measure")
        count = int(np.prod(shape))
        return self._table(measure).draw(rng, count).reshape(shape)

    def goodness_of_fit(self, measure: BaseMeasure, points: np.ndarray) -> float:
        """
        p-значение критерия хи-квадрат по ячейкам сеточной плотности

        Args:
            measure: Сеточная мера
            points: Выборка формы (n, d)

        Returns:
            p-значение
        """
        if measure.kind != MeasureKind.GRID:
            raise ConfigurationError("goodness of fit is defined for grid measures")
        cell = np.floor((points - measure.domain.box_origin) / measure.cell_width).astype(int)
        cell = np.clip(cell, 0, measure.cells - 1)
        flat = np.ravel_multi_index(tuple(cell.T), measure.density.shape)
        observed = np.bincount(flat, minlength=measure.density.size)
        expected = measure.density.ravel() * measure.cell_volume * len(points)
        support = expected > 0
        if np.any(observed[~support]):
            return 0.0
        result = stats.chisquare(observed[support], expected[support])
        logger.info(f"Chi-square over {support.sum()} cells: statistic {result.statistic:.3f}, p = {result.pvalue:.4f}")
        return float(result.pvalue)

    def _table(self, measure: BaseMeasure) -> AliasTable:
        key = id(measure)
        cached = self._tables.get(key)
        if cached is None or cached[0] is not measure:
            weights = measure.density.ravel() if measure.kind == MeasureKind.GRID else measure.weights
            cached = (measure, AliasTable(weights))
            self._tables[key] = cached
        return cached[1]
