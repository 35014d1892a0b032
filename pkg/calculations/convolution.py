"""
Спектральная свертка W_eps ⋆ ρ̄ и коэффициенты Фурье базовых мер
"""

from typing import Optional
import logging

import numpy as np

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import BaseMeasure, Kernel, MeasureKind, UnsupportedConfigurationError, DomainError
from .kernel_calculator import KernelCalculator, fold_to_grid, structure_factor, synthesize

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 64


def fourier_coefficients(measure: BaseMeasure, frequencies: np.ndarray) -> np.ndarray:
    """
    ρ̂(k) = ∫ e^{-2πik·y} dρ̄(y) в плотной форме (L,)*d

    Для сеточной плотности преобразование точное для кусочно-постоянного закона:
    ρ̂(k) = h^d · fft(ρ)[k mod M] · Π_i e^{-πik_i h} sinc(k_i h).
    """
    d = measure.domain.dimension
    shape = (len(frequencies),) * d
    if not measure.domain.is_torus:
        raise UnsupportedConfigurationError("Fourier coefficients are defined on the torus")
    if measure.kind == MeasureKind.UNIFORM:
        result = np.zeros(shape, dtype=complex)
        zero = np.searchsorted(frequencies, 0)
        result[(zero,) * d] = 1.0
        return result
    if measure.kind == MeasureKind.ATOMIC:
        return structure_factor(frequencies, measure.atoms, measure.weights)
    cells = measure.cells
    h = 1.0 / cells
    spectrum = np.fft.fftn(measure.density) * h ** d
    index = np.mod(frequencies, cells)
    result = spectrum[np.ix_(*([index] * d))]
    axis_factor = np.exp(-1j * np.pi * frequencies * h) * np.sinc(frequencies * h)
    for axis in range(d):
        view = [1] * d
        view[axis] = len(frequencies)
        result = result * axis_factor.reshape(view)
    return result


class MeasureConvolver:
    """Свертка ядра с базовой мерой"""

    def __init__(self, kernel_calculator: Optional[KernelCalculator] = None):
        """
        Инициализация

        Args:
            kernel_calculator: Калькулятор ядра
        """
        self.kernel_calculator = kernel_calculator or KernelCalculator()

    def convolve(self, kernel: Kernel, eps: float, measure: BaseMeasure,
                 resolution: Optional[int] = None) -> np.ndarray:
        """
        Поле W_eps ⋆ ρ̄ в центрах ячеек сетки меры

        Args:
            kernel: Ядро
            eps: Регуляризация, eps >= 0
            measure: Базовая мера
            resolution: Сетка для равномерной и атомарной мер

        Returns:
            Значения формы cells^d
        """
        if eps < 0:
            raise DomainError(f"eps must be nonnegative, got {eps}")
        try:
            d = kernel.dimension
            if measure.kind == MeasureKind.ATOMIC:
                return self._direct_sum(kernel, eps, measure, resolution or DEFAULT_RESOLUTION)
            if not kernel.is_torus:
                raise UnsupportedConfigurationError(
                    "free-space convolution supports atomic measures only (direct summation)")
            cells = measure.cells if measure.kind == MeasureKind.GRID else (resolution or DEFAULT_RESOLUTION)
            if measure.kind == MeasureKind.UNIFORM:
                return np.zeros((cells,) * d)
            table = self.kernel_calculator.table(kernel)
            rho_hat = fourier_coefficients(measure, table.frequencies)
            spectrum = table.weights(kernel.semigroup_order, eps) * rho_hat
            return np.real(fold_to_grid(spectrum, table.frequencies, cells, offset=0.5))
        except Exception as e:
            logger.error(f"Error convolving kernel with measure: {e}")
            raise

    def convolve_at(self, kernel: Kernel, eps: float, measure: BaseMeasure, points: np.ndarray) -> np.ndarray:
        """(W_eps ⋆ ρ̄)(x) в произвольных точках"""
        points = np.atleast_2d(points)
        if measure.kind == MeasureKind.ATOMIC:
            delta = kernel.domain.displacement(points[:, None, :], measure.atoms[None, :, :])
            values = self.kernel_calculator.profile(kernel, eps, delta.reshape(-1, kernel.dimension))
            return values.reshape(len(points), -1) @ measure.weights
        if not kernel.is_torus:
            raise UnsupportedConfigurationError("free-space convolution supports atomic measures only")
        if measure.kind == MeasureKind.UNIFORM:
            return np.zeros(len(points))
        table = self.kernel_calculator.table(kernel)
        spectrum = table.weights(kernel.semigroup_order, eps) * fourier_coefficients(measure, table.frequencies)
        return np.real(synthesize(spectrum, table.frequencies, points))

    def self_energy(self, kernel: Kernel, eps: float, measure: BaseMeasure) -> float:
        """∬ W_eps dρ̄ dρ̄ (для атомарной меры без диагонали Ω^2∖Δ)"""
        if measure.kind == MeasureKind.ATOMIC:
            atoms, w = measure.atoms, measure.weights
            delta = kernel.domain.displacement(atoms[:, None, :], atoms[None, :, :])
            off = ~np.eye(len(atoms), dtype=bool)
            values = np.zeros((len(atoms), len(atoms)))
            values[off] = self.kernel_calculator.profile(kernel, eps, delta[off])
            return float(w @ values @ w)
        if not kernel.is_torus:
            raise UnsupportedConfigurationError("free-space self energy supports atomic measures only")
        table = self.kernel_calculator.table(kernel)
        rho_hat = fourier_coefficients(measure, table.frequencies)
        return float(np.sum(table.weights(kernel.semigroup_order, eps) * np.abs(rho_hat) ** 2))

    def _direct_sum(self, kernel: Kernel, eps: float, measure: BaseMeasure, resolution: int) -> np.ndarray:
        centers = measure.cell_centers(resolution)
        values = self.convolve_at(kernel, eps, measure, centers)
        return values.reshape((resolution,) * kernel.dimension)
