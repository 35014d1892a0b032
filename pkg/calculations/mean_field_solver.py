"""
Минимизатор среднего поля: демпфированная итерация μ ← (1-θ)μ + θ·Z^{-1}e^{-W⋆μ-V}
"""

from typing import Optional
import logging

import numpy as np

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import (
    Kernel, Potential, MeanFieldMinimizer, ConfigurationError, ConvergenceError,
    UnsupportedConfigurationError
)
from .mckean_vlasov_solver import McKeanVlasovSolver, kernel_symbol

logger = logging.getLogger(__name__)


class MeanFieldSolver:
    """Решение уравнения Эйлера-Лагранжа на сетке тора"""

    def solve_minimizer(self, kernel: Kernel, potential: Potential, cells: int, damping: float = 0.5,
                        tol: float = 1e-10, max_iter: int = 500, eps: float = 0.0,
                        interacting: bool = True, initial: Optional[np.ndarray] = None) -> MeanFieldMinimizer:
        """
        Демпфированная итерация неподвижной точки

        Args:
            kernel: Ядро на торе
            potential: Потенциал V
            cells: Число ячеек по оси
            damping: θ ∈ (0, 1]
            tol: Порог sup-нормы дефекта
            max_iter: Максимум итераций
            eps: Регуляризация ядра
            interacting: False: W = 0
            initial: Начальная плотность (по умолчанию равномерная)

        Returns:
            Минимизатор μ̄ с нормировкой и свободной энергией
        """
        if not kernel.is_torus:
            raise UnsupportedConfigurationError("mean-field minimizer runs on the torus")
        d = kernel.dimension
        if d not in (1, 2):
            raise ConfigurationError(f"mean-field minimizer supports d in {{1, 2}}, got {d}")
        if not 0 < damping <= 1:
            raise ConfigurationError(f"damping must lie in (0, 1], got {damping}")
        if cells < 8:
            raise ConfigurationError("mean-field grid needs at least 8 cells")
        try:
            symbol = kernel_symbol(kernel, eps, cells) if interacting else np.zeros((cells,) * d)
            v = potential.on_grid(cells)
            mu = np.ones((cells,) * d) if initial is None else np.asarray(initial, dtype=float)
            mu = mu / np.mean(mu)
            history = []
            for iteration in range(max_iter + 1):
                target, z = self._update(mu, symbol, v)
                residual = float(np.max(np.abs(mu - target)))
                history.append(residual)
                if residual < tol:
                    logger.info(f"Mean-field minimizer converged in {iteration} iterations, residual {residual:.2e}")
                    return MeanFieldMinimizer(
                        density=mu, z_mu=z, residual=residual, iterations=iteration,
                        residual_history=history,
                        free_energy=McKeanVlasovSolver.free_energy(mu, symbol, v))
                if iteration == max_iter:
                    break
                mu = (1 - damping) * mu + damping * target
                mu = mu / np.mean(mu)
            raise ConvergenceError(f"mean-field iteration did not converge in {max_iter} iterations "
                                   f"(residual {history[-1]:.2e})", history)
        except Exception as e:
            logger.error(f"Error solving mean-field minimizer: {e}")
            raise

    @staticmethod
    def _update(mu: np.ndarray, symbol: np.ndarray, v: np.ndarray):
        """normalize(e^{-W⋆μ-V}) и нормировка Z"""
        potential = np.real(np.fft.ifftn(symbol * np.fft.fftn(mu, norm="forward"), norm="forward")) + v
        # Сдвиг на минимум для устойчивости экспоненты
        shift = float(np.min(potential))
        weight = np.exp(-(potential - shift))
        z = float(np.mean(weight))
        return weight / z, z * np.exp(-shift)

    def convolve(self, kernel: Kernel, eps: float, density: np.ndarray) -> np.ndarray:
        """W_eps⋆μ на сетке"""
        symbol = kernel_symbol(kernel, eps, density.shape[0])
        return np.real(np.fft.ifftn(symbol * np.fft.fftn(density, norm="forward"), norm="forward"))
