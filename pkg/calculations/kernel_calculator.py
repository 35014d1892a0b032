"""
Калькулятор ядер взаимодействия: усеченный ряд Фурье на торе, -ln|x - y| в R^d,
регуляризация полугруппой P_eps, градиенты, замкнутые формы и оценки хвоста
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional
import logging

import numpy as np
from scipy import integrate, special, stats

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import (
    Kernel, KernelFamily, SemigroupOrder, GapEvaluation,
    DomainError, ConfigurationError, UnsupportedConfigurationError
)

logger = logging.getLogger(__name__)

QUADRATURE_RTOL = 1e-8
# Порог малости аргумента E1, ниже которого используется разложение
SMALL_ARGUMENT = 1e-8
# Показатель гауссова множителя e^{-|2πk|^2 tau} на границе куба при суммировании
# расходящегося ряда градиента голого ядра: tau = SUMMATION_EXPONENT / (2πK)^2
SUMMATION_EXPONENT = 30.0


@dataclass(frozen=True)
class SpectralTable:
    """Плотная таблица коэффициентов ĉ_k = |2πk|^{-d} на кубе |k|_inf <= K"""

    dimension: int
    cutoff: int
    frequencies: np.ndarray  # -K..K
    coefficients: np.ndarray  # форма (2K+1,)*d, ĉ_0 = 0
    norms: np.ndarray  # |2πk|

    def multipliers(self, order: SemigroupOrder, eps: float) -> np.ndarray:
        """Множители m_k(eps) полугруппы"""
        if order == SemigroupOrder.HALF:
            return np.exp(-self.norms * eps)
        return np.exp(-self.norms ** 2 * eps)

    def weights(self, order: SemigroupOrder, eps: float) -> np.ndarray:
        """ĉ_k m_k(eps)"""
        if eps == 0:
            return self.coefficients
        return self.coefficients * self.multipliers(order, eps)

    def wave_vector(self, axis: int) -> np.ndarray:
        """Компонента k_axis в плотной форме"""
        shape = [1] * self.dimension
        shape[axis] = len(self.frequencies)
        return np.broadcast_to(self.frequencies.reshape(shape), self.coefficients.shape)


@lru_cache(maxsize=16)
def spectral_table(dimension: int, cutoff: int) -> SpectralTable:
    """Кэшированная таблица коэффициентов для (d, K)"""
    freqs = np.arange(-cutoff, cutoff + 1)
    axes = np.meshgrid(*([freqs] * dimension), indexing="ij")
    norms = 2 * np.pi * np.sqrt(sum(a.astype(float) ** 2 for a in axes))
    coefficients = np.zeros_like(norms)
    nonzero = norms > 0
    coefficients[nonzero] = norms[nonzero] ** (-dimension)
    for array in (freqs, coefficients, norms):
        array.setflags(write=False)
    return SpectralTable(dimension, cutoff, freqs, coefficients, norms)


def synthesize(weights: np.ndarray, frequencies: np.ndarray, points: np.ndarray,
               chunk: int = 4096) -> np.ndarray:
    """Σ_k w_k e^{2πik·x} для плотной таблицы весов, разделимо по осям

    Args:
        weights: Веса формы (L,)*d
        frequencies: Частоты одной оси
        points: Точки формы (n, d)

    Returns:
        Комплексные суммы формы (n,)
    """
    points = np.atleast_2d(points)
    d = points.shape[1]
    result = np.empty(points.shape[0], dtype=complex)
    for start in range(0, points.shape[0], chunk):
        block = points[start:start + chunk]
        factors = [np.exp(2j * np.pi * np.outer(block[:, a], frequencies)) for a in range(d)]
        if d == 1:
            result[start:start + chunk] = factors[0] @ weights
        elif d == 2:
            result[start:start + chunk] = np.einsum("nb,nb->n", factors[0] @ weights, factors[1])
        else:
            partial = np.einsum("na,abc->nbc", factors[0], weights)
            partial = np.einsum("nbc,nb->nc", partial, factors[1])
            result[start:start + chunk] = np.einsum("nc,nc->n", partial, factors[2])
    return result


def fold_to_grid(weights: np.ndarray, frequencies: np.ndarray, resolution: int,
                 offset: float = 0.0) -> np.ndarray:
    """Значения Σ_k w_k e^{2πik·x} в точках (j + offset)/G через обратное БПФ

    Коэффициенты сворачиваются по k mod G, поэтому значения в узлах точные при любом G.
    """
    d = weights.ndim
    if offset:
        phase = np.exp(2j * np.pi * frequencies * offset / resolution)
        for axis in range(d):
            shape = [1] * d
            shape[axis] = len(frequencies)
            weights = weights * phase.reshape(shape)
    folded = np.zeros((resolution,) * d, dtype=complex)
    index = np.mod(frequencies, resolution)
    np.add.at(folded, np.ix_(*([index] * d)), weights)
    return np.fft.ifftn(folded) * resolution ** d


class KernelCalculator:
    """Вычисление W, W_eps = P_eps W и их градиентов"""

    def __init__(self, quadrature_rtol: float = QUADRATURE_RTOL):
        """
        Инициализация калькулятора

        Args:
            quadrature_rtol: Относительная точность радиальной квадратуры (d = 3, R^d)
        """
        self.quadrature_rtol = quadrature_rtol

    # Спектральное представление

    def table(self, kernel: Kernel) -> SpectralTable:
        """Таблица коэффициентов ядра на торе"""
        if not kernel.is_torus:
            raise UnsupportedConfigurationError("free-space kernels have no Fourier table")
        if kernel.fourier_cutoff == 0:
            raise ConfigurationError("fourier_cutoff K = 0 leaves no modes")
        return spectral_table(kernel.dimension, kernel.fourier_cutoff)

    def weights(self, kernel: Kernel, eps: float) -> np.ndarray:
        """ĉ_k m_k(eps) в плотной форме"""
        return self.table(kernel).weights(kernel.semigroup_order, eps)

    def semigroup_multipliers(self, kernel: Kernel, eps: float) -> np.ndarray:
        """m_k(eps); P_eps P_delta = P_{eps+delta} поэлементно"""
        return self.table(kernel).multipliers(kernel.semigroup_order, eps)

    def gradient_weights(self, kernel: Kernel, eps: float) -> np.ndarray:
        """
        Веса ряда градиента

        При eps > 0 это ĉ_k m_k(eps). При eps = 0 почленно продифференцированный ряд
        расходится, поэтому он суммируется гауссовым множителем e^{-|2πk|^2 tau}, tau -> 0 с ростом K.
        Вне окрестности диагонали радиуса ~sqrt(tau) ошибка экспоненциально мала.
        """
        table = self.table(kernel)
        if eps > 0:
            return table.weights(kernel.semigroup_order, eps)
        tau = SUMMATION_EXPONENT / (2 * np.pi * table.cutoff) ** 2
        return table.coefficients * np.exp(-table.norms ** 2 * tau)

    # Поточечные операции

    def eval_kernel(self, kernel: Kernel, x, y) -> float:
        """
        Значение W(x, y)

        Args:
            kernel: Ядро
            x: Первая точка
            y: Вторая точка

        Returns:
            Усеченный ряд на торе или -ln|x - y| в R^d
        """
        delta = self._displacement(kernel, x, y)
        return float(self.profile(kernel, 0.0, delta)[0])

    def eval_regularized(self, kernel: Kernel, eps: float, x, y) -> float:
        """
        Значение W_eps(x, y) = (P_eps W)(x, y)

        Args:
            kernel: Ядро
            eps: Время полугруппы, eps > 0
            x: Первая точка
            y: Вторая точка

        Returns:
            Регуляризованное значение (конечно на диагонали)
        """
        if eps <= 0:
            raise DomainError(f"regularization requires eps > 0, got {eps}")
        delta = self._displacement(kernel, x, y)
        return float(self.profile(kernel, eps, delta)[0])

    def eval_gradient(self, kernel: Kernel, eps: float, x, y) -> np.ndarray:
        """
        Градиент ∇_1 W_eps(x, y) по первому аргументу

        Args:
            kernel: Ядро
            eps: Регуляризация, eps >= 0
            x: Первая точка
            y: Вторая точка

        Returns:
            Вектор размерности d
        """
        if eps < 0:
            raise DomainError(f"eps must be nonnegative, got {eps}")
        delta = self._displacement(kernel, x, y)
        if eps == 0 and not np.any(delta):
            raise DomainError("bare kernel gradient evaluated on the diagonal")
        return self.gradient_profile(kernel, eps, delta)[0]

    def diagonal_value(self, kernel: Kernel, eps: float) -> float:
        """W_eps(x, x), не зависит от x"""
        if kernel.is_torus:
            return float(np.sum(self.weights(kernel, eps)))
        if eps <= 0:
            raise DomainError("bare free-space kernel is infinite on the diagonal")
        return float(self.profile(kernel, eps, np.zeros((1, kernel.dimension)))[0])

    # Векторные профили F_eps(r), r = x - y

    def profile(self, kernel: Kernel, eps: float, displacements) -> np.ndarray:
        """F_eps в смещениях формы (n, d)"""
        r = np.atleast_2d(np.asarray(displacements, dtype=float))
        if kernel.is_torus:
            table = self.table(kernel)
            return np.real(synthesize(table.weights(kernel.semigroup_order, eps), table.frequencies, r))
        return self.analytic_profile(kernel, eps, r)

    def gradient_profile(self, kernel: Kernel, eps: float, displacements) -> np.ndarray:
        """∇F_eps в смещениях формы (n, d)"""
        r = np.atleast_2d(np.asarray(displacements, dtype=float))
        if kernel.is_torus:
            if eps == 0 and kernel.dimension == 1:
                return self.analytic_gradient(kernel, 0.0, r)
            table = self.table(kernel)
            weights = self.gradient_weights(kernel, eps)
            grad = np.empty_like(r)
            for axis in range(kernel.dimension):
                component = weights * (2j * np.pi * table.wave_vector(axis))
                grad[:, axis] = np.real(synthesize(component, table.frequencies, r))
            return grad
        return self.analytic_gradient(kernel, eps, r)

    def grid_profile(self, kernel: Kernel, eps: float, resolution: int, offset: float = 0.0) -> np.ndarray:
        """Усеченный ряд F_eps в узлах (j + offset)/G тора, форма G^d"""
        table = self.table(kernel)
        weights = table.weights(kernel.semigroup_order, eps)
        return np.real(fold_to_grid(weights, table.frequencies, resolution, offset))

    # Замкнутые формы

    def analytic_profile(self, kernel: Kernel, eps: float, displacements) -> np.ndarray:
        """
        Замкнутая форма F_eps: тор d = 1 и -ln|·| в R^d

        Args:
            kernel: Ядро
            eps: Регуляризация
            displacements: Смещения формы (n, d)

        Returns:
            Значения формы (n,)
        """
        r_vec = np.atleast_2d(np.asarray(displacements, dtype=float))
        d = kernel.dimension
        if kernel.is_torus:
            if d != 1:
                raise UnsupportedConfigurationError("closed form of the torus kernel exists only for d = 1")
            x = r_vec[:, 0]
            if eps == 0:
                s = np.abs(np.sin(np.pi * x))
                if np.any(s == 0):
                    raise DomainError("bare torus kernel evaluated on the diagonal")
                return -np.log(2 * s) / np.pi
            q = np.exp(-2 * np.pi * eps)
            return -np.log1p(-2 * q * np.cos(2 * np.pi * x) + q * q) / (2 * np.pi)
        r = np.linalg.norm(r_vec, axis=1)
        if eps == 0:
            if np.any(r == 0):
                raise DomainError("free-space log kernel evaluated on the diagonal")
            return -np.log(r)
        if d == 1:
            return -0.5 * np.log(r ** 2 + eps ** 2)
        if d == 2:
            u = r ** 2 / (4 * eps)
            small = u < SMALL_ARGUMENT
            out = np.empty_like(r)
            out[small] = -0.5 * (np.log(4 * eps) - np.euler_gamma + u[small])
            big = ~small
            out[big] = -np.log(r[big]) - 0.5 * special.exp1(u[big])
            return out
        return self._gaussian_log_3d(r, eps)

    def analytic_gradient(self, kernel: Kernel, eps: float, displacements) -> np.ndarray:
        """Замкнутая форма ∇F_eps"""
        r_vec = np.atleast_2d(np.asarray(displacements, dtype=float))
        d = kernel.dimension
        if kernel.is_torus:
            if d != 1:
                raise UnsupportedConfigurationError("closed form of the torus kernel exists only for d = 1")
            x = r_vec[:, 0]
            if eps == 0:
                if np.any(np.sin(np.pi * x) == 0):
                    raise DomainError("bare torus kernel gradient evaluated on the diagonal")
                return (-1.0 / np.tan(np.pi * x))[:, None]
            q = np.exp(-2 * np.pi * eps)
            c = 2 * np.pi * x
            return (-2 * q * np.sin(c) / (1 - 2 * q * np.cos(c) + q * q))[:, None]
        r2 = np.sum(r_vec ** 2, axis=1)
        if eps == 0:
            if np.any(r2 == 0):
                raise DomainError("free-space log kernel gradient evaluated on the diagonal")
            return -r_vec / r2[:, None]
        if d == 1:
            return -r_vec / (r2 + eps ** 2)[:, None]
        safe = np.where(r2 > 0, r2, 1.0)
        if d == 2:
            factor = -np.expm1(-r2 / (4 * eps)) / safe
            factor = np.where(r2 > 0, factor, 0.0)
            return -r_vec * factor[:, None]
        # Радиальная производная конечной разностью квадратуры
        r = np.sqrt(r2)
        h = 1e-4 * np.maximum(r, np.sqrt(2 * eps))
        slope = (self._gaussian_log_3d(r + h, eps) - self._gaussian_log_3d(np.abs(r - h), eps)) / (2 * h)
        slope = np.where(r > 0, slope, 0.0)
        return r_vec * (slope / np.where(r > 0, r, 1.0))[:, None]

    def _gaussian_log_3d(self, r: np.ndarray, eps: float) -> np.ndarray:
        """-E ln|r + σZ| в R^3, σ^2 = 2 eps, через нецентральное χ^2_3"""
        sigma2 = 2 * eps
        radii, inverse = np.unique(np.asarray(r, dtype=float), return_inverse=True)
        values = np.empty_like(radii)
        for i, radius in enumerate(radii):
            lam = radius ** 2 / sigma2
            if lam == 0:
                mean_log = special.digamma(1.5) + np.log(2.0)
            else:
                center = lam + 3.0
                spread = np.sqrt(2 * (3.0 + 2 * lam))
                lower, upper = max(0.0, center - 40 * spread), center + 40 * spread
                mean_log, _ = integrate.quad(
                    lambda t: np.log(t) * stats.ncx2.pdf(t, 3, lam), lower, upper,
                    epsrel=self.quadrature_rtol, limit=200, points=[center] if lower < center < upper else None)
            values[i] = -0.5 * (np.log(sigma2) + mean_log)
        return values[inverse]

    # Разность W - W_eps

    def regularization_gap(self, kernel: Kernel, eps: float, displacements,
                           mode: GapEvaluation = GapEvaluation.AUTO) -> np.ndarray:
        """
        Разность (W - W_eps)(r)

        Args:
            kernel: Ядро
            eps: Регуляризация, eps > 0
            displacements: Смещения формы (n, d)
            mode: Усеченный ряд или точная замкнутая форма

        Returns:
            Значения формы (n,)
        """
        if eps <= 0:
            raise DomainError(f"regularization gap requires eps > 0, got {eps}")
        r_vec = np.atleast_2d(np.asarray(displacements, dtype=float))
        d = kernel.dimension
        closed_available = not kernel.is_torus or d <= 2
        if mode == GapEvaluation.CLOSED_FORM and not closed_available:
            raise UnsupportedConfigurationError("no closed form of W - W_eps for the torus in d = 3")
        if mode == GapEvaluation.SERIES or not closed_available:
            if not kernel.is_torus:
                raise UnsupportedConfigurationError("free-space kernels have no Fourier series")
            table = self.table(kernel)
            multipliers = table.multipliers(kernel.semigroup_order, eps)
            return np.real(synthesize(table.coefficients * (1 - multipliers), table.frequencies, r_vec))

        if kernel.is_torus and d == 1:
            return self.analytic_profile(kernel, 0.0, r_vec) - self.analytic_profile(kernel, eps, r_vec)
        if kernel.is_torus:
            return self._periodic_heat_gap(r_vec, eps)
        r2 = np.sum(r_vec ** 2, axis=1)
        if d == 1:
            return 0.5 * np.log1p(eps ** 2 / r2)
        if d == 2:
            return 0.5 * special.exp1(r2 / (4 * eps))
        return -0.5 * np.log(r2) - self._gaussian_log_3d(np.sqrt(r2), eps)

    @staticmethod
    def _periodic_heat_gap(r_vec: np.ndarray, eps: float) -> np.ndarray:
        """Тор d = 2: (1/4π) Σ_n E1(|x + n|^2 / 4eps) - eps"""
        r_vec = r_vec - np.floor(r_vec + 0.5)
        reach = int(np.ceil(np.sqrt(4 * eps * 50.0))) + 1
        shifts = np.arange(-reach, reach + 1)
        total = np.zeros(r_vec.shape[0])
        for a in shifts:
            for b in shifts:
                dist2 = (r_vec[:, 0] + a) ** 2 + (r_vec[:, 1] + b) ** 2
                total += special.exp1(dist2 / (4 * eps))
        return total / (4 * np.pi) - eps

    # Оценки хвоста

    def tail_bound(self, kernel: Kernel, eps: float, displacement=None) -> float:
        """
        Оценка |F_eps - F_eps^{(K)}| отброшенных мод

        Args:
            kernel: Ядро на торе
            eps: Регуляризация
            displacement: Точка для поточечной оценки (eps = 0, d = 1)

        Returns:
            Σ_{|k|_inf > K} ĉ_k m_k при eps > 0; 1/(π(K+1)|sin πx|) при eps = 0, d = 1; иначе inf
        """
        cutoff = self.table(kernel).cutoff
        d = kernel.dimension
        if eps > 0:
            if kernel.semigroup_order == SemigroupOrder.HALF:
                last = 40.0 / (2 * np.pi * eps)
            else:
                last = np.sqrt(40.0 / eps) / (2 * np.pi)
            last = int(min(max(last, cutoff + 2), cutoff + 1e7))
            n = np.arange(cutoff + 1, last + 1, dtype=float)
            shell = (2 * n + 1) ** d - (2 * n - 1) ** d
            radius = 2 * np.pi * n
            if kernel.semigroup_order == SemigroupOrder.HALF:
                decay = np.exp(-radius * eps)
            else:
                decay = np.exp(-radius ** 2 * eps)
            return float(np.sum(shell * radius ** (-d) * decay))
        if d == 1 and displacement is not None:
            x = float(np.ravel(displacement)[0])
            s = abs(np.sin(np.pi * x))
            return float("inf") if s == 0 else 1.0 / (np.pi * (cutoff + 1) * s)
        return float("inf")

    # Проверка H-устойчивости

    def h_stability_pair(self, kernel: Kernel, eps: float, atoms: np.ndarray, charges: np.ndarray):
        """
        ∬ W_eps dη dη для атомарной η с нулевой суммой двумя способами

        Returns:
            (квадратура по атомам, спектральная сумма Σ ĉ m |η̂|^2)
        """
        charges = np.asarray(charges, dtype=float)
        atoms = np.atleast_2d(atoms)
        delta = atoms[:, None, :] - atoms[None, :, :]
        pairwise = self.profile(kernel, eps, delta.reshape(-1, kernel.dimension)).reshape(len(atoms), len(atoms))
        quadrature = float(charges @ pairwise @ charges)
        table = self.table(kernel)
        structure = structure_factor(table.frequencies, atoms, charges)
        spectral = float(np.sum(table.weights(kernel.semigroup_order, eps) * np.abs(structure) ** 2))
        return quadrature, spectral

    @staticmethod
    def _displacement(kernel: Kernel, x, y) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if x.shape != (kernel.dimension,) or y.shape != (kernel.dimension,):
            raise ConfigurationError(f"points must have dimension {kernel.dimension}")
        return kernel.domain.displacement(x, y)[None, :]


def structure_factor(frequencies: np.ndarray, points: np.ndarray, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """S_k = Σ_i w_i e^{-2πik·x_i} в плотной форме (L,)*d

    Для пакета конфигураций формы (B, N, d) возвращает (B, L, ..., L).
    """
    points = np.asarray(points, dtype=float)
    batched = points.ndim == 3
    if not batched:
        points = points[None]
    b, n, d = points.shape
    w = np.ones((b, n)) if weights is None else np.broadcast_to(np.asarray(weights, dtype=float), (b, n))
    factors = [np.exp(-2j * np.pi * points[:, :, a, None] * frequencies) for a in range(d)]
    first = factors[0] * w[:, :, None]
    if d == 1:
        result = first.sum(axis=1)
    elif d == 2:
        result = np.einsum("bia,bic->bac", first, factors[1])
    else:
        result = np.einsum("bia,bic,bie->bace", first, factors[1], factors[2])
    return result if batched else result[0]
