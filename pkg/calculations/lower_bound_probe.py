"""
Поиск нижней границы I̊_W отжигом со спектральным обновлением энергии
"""

from typing import Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import (
    Kernel, BaseMeasure, MeasureKind, Configuration, RandomStream, Verdict,
    ConfigurationError, UnsupportedConfigurationError
)
from .kernel_calculator import KernelCalculator, structure_factor
from .convolution import fourier_coefficients
from .energy_calculator import EnergyCalculator
from .measure_sampler import MeasureSampler

logger = logging.getLogger(__name__)

START_TEMPERATURE = 1.0
END_TEMPERATURE = 1e-3
MIN_SCALE_FRACTION = 0.02


class _SpectralState:
    """Структурный фактор конфигурации с обновлением O(L^d) на сдвиг одной частицы"""

    def __init__(self, frequencies: np.ndarray, weights: np.ndarray, rho_hat: Optional[np.ndarray],
                 points: np.ndarray, mean_term: float):
        self.frequencies = frequencies
        self.weights = weights
        self.rho_hat = rho_hat
        self.points = points.copy()
        self.n = len(points)
        self.mean_term = mean_term
        self.refresh()

    def refresh(self):
        self.s = structure_factor(self.frequencies, self.points)
        self.energy = self._energy(self.s)

    def _energy(self, s: np.ndarray) -> float:
        pair = float(np.sum(self.weights * (np.abs(s) ** 2 - self.n))) / (2 * self.n)
        if self.rho_hat is None:
            return pair
        cross = float(np.sum(self.weights * np.real(self.rho_hat * np.conj(s))))
        return pair - cross + self.mean_term

    def _mode(self, x: np.ndarray) -> np.ndarray:
        factors = [np.exp(-2j * np.pi * x[a] * self.frequencies) for a in range(len(x))]
        mode = factors[0]
        for factor in factors[1:]:
            mode = np.multiply.outer(mode, factor)
        return mode

    def propose(self, index: int, target: np.ndarray) -> Tuple[float, np.ndarray]:
        """Изменение энергии и новый структурный фактор при сдвиге частицы"""
        s_new = self.s + self._mode(target) - self._mode(self.points[index])
        return self._energy(s_new) - self.energy, s_new

    def accept(self, index: int, target: np.ndarray, s_new: np.ndarray, delta: float):
        self.points[index] = target
        self.s = s_new
        self.energy += delta


class LowerBoundProbe:
    """Адверсариальная минимизация I̊ по конфигурациям"""

    def __init__(self, energy_calculator: Optional[EnergyCalculator] = None,
                 sampler: Optional[MeasureSampler] = None, sweeps: int = 200):
        """
        Инициализация

        Args:
            energy_calculator: Калькулятор энергии
            sampler: Выборка стартовых конфигураций
            sweeps: Число проходов отжига
        """
        self.energy_calculator = energy_calculator or EnergyCalculator()
        self.kernel_calculator: KernelCalculator = self.energy_calculator.kernel_calculator
        self.sampler = sampler or MeasureSampler()
        self.sweeps = sweeps

    def probe_lower_bound(self, kernel: Kernel, measure: BaseMeasure, n_values: Sequence[int],
                          search_budget: int, stream: RandomStream, eps: float = 0.0) -> Tuple[pd.DataFrame, Verdict]:
        """
        Минимум I̊_{W_eps} по отжигу для каждого N

        Args:
            kernel: Ядро на торе
            measure: Равномерная или сеточная мера
            n_values: Значения N >= 2
            search_budget: Число запусков отжига на N (первый из кластера)
            stream: Поток случайных чисел
            eps: Регуляризация

        Returns:
            Таблица (N, min, min/(-ln N), нижняя граница) и вердикт
        """
        if search_budget < 1:
            raise ConfigurationError("search_budget must be positive")
        if not kernel.is_torus or measure.kind == MeasureKind.ATOMIC:
            raise UnsupportedConfigurationError("lower-bound probe needs a torus kernel and a continuous measure")
        if not n_values or min(n_values) < 2:
            raise ConfigurationError("probe n_values must be at least 2")
        try:
            floor = -0.5 * self.kernel_calculator.diagonal_value(kernel, eps) if eps > 0 else float("-inf")
            rows = []
            for n in n_values:
                best, best_points = float("inf"), None
                for run in range(search_budget):
                    energy, points = self._anneal(kernel, eps, measure, n, run, stream.child("probe", n, run))
                    if energy < best:
                        best, best_points = energy, points
                exact = self.energy_calculator.interaction_energy(
                    kernel, eps, measure, Configuration.from_points(kernel.domain, best_points)).total
                ratio = exact / -np.log(n)
                rows.append({"N": n, "min_energy": exact, "ratio": ratio, "floor": floor,
                             "above_floor": bool(exact >= floor - 1e-9)})
                logger.info(f"Probe N={n}: min {exact:.5f}, ratio to -ln N {ratio:.4f}")
            frame = pd.DataFrame(rows)
            return frame, self._verdict(frame)
        except Exception as e:
            logger.error(f"Error in lower-bound probe: {e}")
            raise

    @staticmethod
    def _verdict(frame: pd.DataFrame) -> Verdict:
        """Отношение не растет с N, регуляризованный минимум не ниже -W_eps(0)/2"""
        ratios = frame["ratio"].to_numpy()
        if not np.all(np.isfinite(ratios)) or not frame["above_floor"].all():
            return Verdict.FAIL
        half = max(1, len(ratios) // 2)
        early, late = ratios[:half], ratios[half:]
        if len(late) == 0:
            return Verdict.INCONCLUSIVE
        return Verdict.of(bool(late.max() <= 2.0 * max(early.max(), 0.0) + 1e-12))

    def _anneal(self, kernel: Kernel, eps: float, measure: BaseMeasure, n: int, run: int,
                stream: RandomStream) -> Tuple[float, np.ndarray]:
        rng = stream.generator()
        d = kernel.dimension
        if run == 0:
            points = self._cluster(n, d, rng)
        else:
            points = self.sampler.sample_points(measure, n, rng)

        table = self.kernel_calculator.table(kernel)
        weights = table.weights(kernel.semigroup_order, eps)
        rho_hat = None
        mean_term = 0.0
        if measure.kind != MeasureKind.UNIFORM:
            rho_hat = fourier_coefficients(measure, table.frequencies)
            mean_term = 0.5 * n * float(np.sum(weights * np.abs(rho_hat) ** 2))
        state = _SpectralState(table.frequencies, weights, rho_hat, points, mean_term)

        spacing = n ** (-1.0 / d)
        best, best_points = state.energy, state.points.copy()
        ratio = END_TEMPERATURE / START_TEMPERATURE
        for sweep in range(self.sweeps):
            temperature = START_TEMPERATURE * ratio ** (sweep / max(self.sweeps - 1, 1))
            scale = 0.5 * spacing * max(np.sqrt(temperature / START_TEMPERATURE), MIN_SCALE_FRACTION)
            order = rng.permutation(n)
            steps = rng.normal(scale=scale, size=(n, d))
            coins = rng.random(n)
            for index, step, coin in zip(order, steps, coins):
                target = kernel.domain.wrap(state.points[index] + step)
                delta, s_new = state.propose(index, target)
                if delta <= 0 or coin < np.exp(-delta / temperature):
                    state.accept(index, target, s_new, delta)
            # Пересчет без накопленной ошибки округления
            state.refresh()
            if state.energy < best:
                best, best_points = state.energy, state.points.copy()
        logger.debug(f"Annealing run {run} for N={n}: best {best:.5f}")
        return best, best_points

    @staticmethod
    def _cluster(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
        """n точек в шаре радиуса 1/n вокруг случайного центра"""
        center = rng.random(d)
        direction = rng.standard_normal((n, d))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = rng.random(n) ** (1.0 / d) / n
        return np.mod(center + direction * radius[:, None], 1.0)
