"""
Энергия взаимодействия поля флуктуаций I̊_{W_eps}[η^N_x] без диагонали
"""

from typing import Optional
import logging

import numpy as np

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import (
    Kernel, BaseMeasure, MeasureKind, Configuration, EnergyBreakdown, FluctuationNormalization,
    DomainError, ConfigurationError, UnsupportedConfigurationError
)
from .kernel_calculator import KernelCalculator, structure_factor
from .convolution import MeasureConvolver, fourier_coefficients

logger = logging.getLogger(__name__)

# Ограничение на число комплексных элементов в одном блоке пакетного расчета
BATCH_ELEMENTS = 2_000_000


class EnergyCalculator:
    """Разложение I̊ = pair - cross + mean и связанные величины"""

    def __init__(self, kernel_calculator: Optional[KernelCalculator] = None,
                 normalization: FluctuationNormalization = FluctuationNormalization.CENTERED):
        """
        Инициализация калькулятора энергии

        Args:
            kernel_calculator: Калькулятор ядра
            normalization: Нормировка η (Nρ̄ или буквальная ρ̄)
        """
        self.kernel_calculator = kernel_calculator or KernelCalculator()
        self.convolver = MeasureConvolver(self.kernel_calculator)
        self.normalization = FluctuationNormalization(normalization)

    def _scales(self, n: int):
        """Множители перекрестного и среднего членов"""
        if self.normalization == FluctuationNormalization.LITERAL:
            return 1.0 / n, 1.0 / n ** 2
        return 1.0, 1.0

    # Основная операция

    def interaction_energy(self, kernel: Kernel, eps: float, measure: BaseMeasure,
                           config: Configuration) -> EnergyBreakdown:
        """
        Трехчленное разложение I̊_{W_eps}[η^N_x]

        Args:
            kernel: Ядро
            eps: Регуляризация, eps >= 0
            measure: Базовая мера
            config: Конфигурация частиц

        Returns:
            Разложение энергии
        """
        if eps < 0:
            raise DomainError(f"eps must be nonnegative, got {eps}")
        try:
            if eps == 0 and config.n > 1 and len(np.unique(config.points, axis=0)) < config.n:
                if not kernel.is_torus or measure.kind != MeasureKind.ATOMIC:
                    raise DomainError("coincident points with the bare kernel")
            return self._breakdown(kernel, eps, measure, config)
        except Exception as e:
            logger.error(f"Error computing interaction energy: {e}")
            raise

    def _breakdown(self, kernel: Kernel, eps: float, measure: BaseMeasure, config: Configuration) -> EnergyBreakdown:
        """Разложение без проверки совпадений; для атомарной ρ̄ совпадающие точки сливаются"""
        n = config.n
        if measure.kind == MeasureKind.ATOMIC:
            pair, cross, mean = self._atomic_terms(kernel, eps, measure, config.points)
        else:
            if not kernel.is_torus:
                raise UnsupportedConfigurationError("free-space energies support atomic base measures only")
            pair, cross, mean = self._spectral_terms(kernel, eps, measure, config.points)
        cross_scale, mean_scale = self._scales(n)
        cross, mean = cross * cross_scale, mean * mean_scale
        breakdown = EnergyBreakdown(n=n, eps=eps, pair_term=pair, cross_term=cross,
                                    mean_term=mean, total=pair - cross + mean)
        logger.debug(f"Energy N={n}, eps={eps}: total {breakdown.total:.6g}")
        return breakdown

    def _spectral_terms(self, kernel: Kernel, eps: float, measure: BaseMeasure, points: np.ndarray):
        table = self.kernel_calculator.table(kernel)
        weights = table.weights(kernel.semigroup_order, eps)
        n = len(points)
        s = structure_factor(table.frequencies, points)
        pair = float(np.sum(weights * (np.abs(s) ** 2 - n))) / (2 * n)
        if measure.kind == MeasureKind.UNIFORM:
            return pair, 0.0, 0.0
        rho_hat = fourier_coefficients(measure, table.frequencies)
        cross = float(np.sum(weights * np.real(rho_hat * np.conj(s))))
        mean = 0.5 * n * float(np.sum(weights * np.abs(rho_hat) ** 2))
        return pair, cross, mean

    def _atomic_terms(self, kernel: Kernel, eps: float, measure: BaseMeasure, points: np.ndarray):
        """Слияние совпадающих точек: частицы и атомы в одной точке не взаимодействуют"""
        n = len(points)
        merged, inverse = np.unique(np.vstack([points, measure.atoms]), axis=0, return_inverse=True)
        inverse = np.ravel(inverse)
        counts = np.bincount(inverse[:n], minlength=len(merged)).astype(float)
        w = np.bincount(inverse[n:], weights=measure.weights, minlength=len(merged))
        table = self.pairwise_table(kernel, eps, merged)
        pair = float(counts @ table @ counts) / (2 * n)
        cross = float(counts @ table @ w)
        mean = 0.5 * n * float(w @ table @ w)
        return pair, cross, mean

    def pairwise_table(self, kernel: Kernel, eps: float, points: np.ndarray) -> np.ndarray:
        """Таблица W_eps(y_a, y_b) с нулевой диагональю"""
        m, d = points.shape
        table = np.zeros((m, m))
        if m < 2:
            return table
        upper = np.triu_indices(m, k=1)
        delta = kernel.domain.displacement(points[upper[0]], points[upper[1]])
        values = self.kernel_calculator.profile(kernel, eps, delta.reshape(-1, d))
        table[upper] = values
        table[(upper[1], upper[0])] = values
        return table

    # Прямая сумма и спектральное тождество

    def pair_energy_direct(self, kernel: Kernel, eps: float, points: np.ndarray) -> float:
        """(1/2N) Σ_{i≠j} W_eps(x_i, x_j) прямым суммированием по парам"""
        points = np.atleast_2d(points)
        n = len(points)
        if n < 2:
            return 0.0
        i, j = np.triu_indices(n, k=1)
        delta = kernel.domain.displacement(points[i], points[j])
        values = self.kernel_calculator.profile(kernel, eps, delta)
        return float(np.sum(values)) / n

    def pair_energy_spectral(self, kernel: Kernel, eps: float, points: np.ndarray) -> float:
        """(1/2N) Σ_{k≠0} ĉ_k m_k (|S_k|^2 - N)"""
        table = self.kernel_calculator.table(kernel)
        n = len(points)
        s = structure_factor(table.frequencies, np.atleast_2d(points))
        return float(np.sum(table.weights(kernel.semigroup_order, eps) * (np.abs(s) ** 2 - n))) / (2 * n)

    # Пакетный расчет

    def batch_energies(self, kernel: Kernel, eps: float, measure: BaseMeasure, points: np.ndarray) -> np.ndarray:
        """
        Полные энергии для пакета конфигураций

        Args:
            kernel: Ядро
            eps: Регуляризация
            measure: Базовая мера
            points: Массив формы (B, N, d)

        Returns:
            Значения I̊ формы (B,)
        """
        points = np.asarray(points, dtype=float)
        b, n, _ = points.shape
        if measure.kind == MeasureKind.ATOMIC or not kernel.is_torus:
            # выборки из атомарной ρ̄ совпадают с положительной вероятностью: Ω²∖Δ, как при переборе
            return np.array([
                self._breakdown(kernel, eps, measure, Configuration(domain=kernel.domain, points=p)).total
                for p in points])
        table = self.kernel_calculator.table(kernel)
        weights = table.weights(kernel.semigroup_order, eps)
        rho_hat = None if measure.kind == MeasureKind.UNIFORM else fourier_coefficients(measure, table.frequencies)
        cross_scale, mean_scale = self._scales(n)
        mean = 0.0 if rho_hat is None else 0.5 * n * float(np.sum(weights * np.abs(rho_hat) ** 2)) * mean_scale
        width = len(table.frequencies)
        block = max(1, BATCH_ELEMENTS // (n * width + weights.size))
        totals = np.empty(b)
        for start in range(0, b, block):
            s = structure_factor(table.frequencies, points[start:start + block])
            axes = tuple(range(1, s.ndim))
            pair = np.sum(weights * (np.abs(s) ** 2 - n), axis=axes) / (2 * n)
            if rho_hat is None:
                totals[start:start + block] = pair
            else:
                cross = np.sum(weights * np.real(rho_hat * np.conj(s)), axis=axes) * cross_scale
                totals[start:start + block] = pair - cross + mean
        return totals

    def atom_table(self, kernel: Kernel, eps: float, measure: BaseMeasure) -> np.ndarray:
        """Таблица взаимодействия атомов с нулевой диагональю"""
        if measure.kind != MeasureKind.ATOMIC:
            raise ConfigurationError("atom table requires an atomic measure")
        if len(np.unique(measure.atoms, axis=0)) < len(measure.atoms):
            raise ConfigurationError("atomic measure has repeated atom locations")
        return self.pairwise_table(kernel, eps, measure.atoms)

    def energy_from_counts(self, table: np.ndarray, weights: np.ndarray, counts: np.ndarray) -> np.ndarray:
        """
        I̊ по числам заполнения атомов: (1/2N) c^T W c, c = n - Nw

        Args:
            table: Таблица атомов с нулевой диагональю
            weights: Веса атомов
            counts: Числа заполнения формы (B, m)

        Returns:
            Энергии формы (B,)
        """
        counts = np.atleast_2d(np.asarray(counts, dtype=float))
        n = counts.sum(axis=1)
        if self.normalization == FluctuationNormalization.LITERAL:
            charges = counts - weights[None, :]
        else:
            charges = counts - n[:, None] * weights[None, :]
        return np.einsum("bi,ij,bj->b", charges, table, charges) / (2 * n)

    # Средние и оракулы

    def mean_energy(self, kernel: Kernel, eps: float, measure: BaseMeasure, n: int) -> float:
        """
        E_{ρ̄^{⊗n}}[I̊_{W_eps}] = c(n) ∬_{Ω²∖Δ} W_eps dρ̄ dρ̄

        Коэффициент c(n) = (n-1)/2 - n + n/2 = -1/2 для нормировки Nρ̄
        и (n-1)/2 - 1 + 1/(2n) для буквальной.
        """
        if n < 1:
            raise ConfigurationError(f"n must be positive, got {n}")
        if measure.kind == MeasureKind.UNIFORM and kernel.is_torus:
            return 0.0
        if measure.kind != MeasureKind.ATOMIC and not kernel.is_torus:
            raise UnsupportedConfigurationError("free-space mean energy supports atomic base measures only")
        double = self.convolver.self_energy(kernel, eps, measure)
        cross_scale, mean_scale = self._scales(n)
        coefficient = (n - 1) / 2.0 - n * cross_scale + n * mean_scale / 2.0
        return coefficient * double

    def full_energy(self, kernel: Kernel, eps: float, measure: BaseMeasure, config: Configuration) -> float:
        """I_{W_eps}[η] = I̊_{W_eps}[η] + (1/2N) Σ_i W_eps(x_i, x_i)"""
        breakdown = self.interaction_energy(kernel, eps, measure, config)
        return breakdown.total + 0.5 * self.kernel_calculator.diagonal_value(kernel, eps)

    def lattice_energy(self, kernel: Kernel, eps: float, per_axis: int) -> float:
        """
        I̊ равномерной решетки из per_axis^d точек при равномерной ρ̄

        S_k = N на подрешетке k ∈ mZ^d и 0 иначе, откуда
        I̊ = (N/2) Σ_{k ∈ mZ^d∖0} ĉ_k m_k - (1/2) Σ_{k≠0} ĉ_k m_k.
        """
        table = self.kernel_calculator.table(kernel)
        weights = table.weights(kernel.semigroup_order, eps)
        n = per_axis ** kernel.dimension
        on_lattice = np.ones(weights.shape, dtype=bool)
        for axis in range(kernel.dimension):
            on_lattice &= np.mod(table.wave_vector(axis), per_axis) == 0
        return 0.5 * n * float(np.sum(weights[on_lattice])) - 0.5 * float(np.sum(weights))

    @staticmethod
    def lattice_points(dimension: int, per_axis: int) -> np.ndarray:
        """Узлы j/m решетки на T^d"""
        grid = np.arange(per_axis) / per_axis
        axes = np.meshgrid(*([grid] * dimension), indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=-1)
