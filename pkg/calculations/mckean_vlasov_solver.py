"""
Псевдоспектральный решатель уравнения Маккина-Власова на торе
∂_t ρ = Δρ + ∇·(ρ(∇W_eps⋆ρ + ∇V))
"""

from typing import List, Optional, Tuple
import logging

import numpy as np

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import (
    Kernel, BaseMeasure, Potential, PdeState, MvTrajectory, SemigroupOrder,
    ConfigurationError, UnsupportedConfigurationError, IntegrationError
)

logger = logging.getLogger(__name__)

MAX_HALVINGS = 10
MASS_LOG_THRESHOLD = 1e-12


def grid_wavenumbers(cells: int, dimension: int) -> List[np.ndarray]:
    """Целые волновые числа БПФ по осям в форме для broadcasting"""
    k = np.fft.fftfreq(cells, d=1.0 / cells)
    vectors = []
    for axis in range(dimension):
        shape = [1] * dimension
        shape[axis] = cells
        vectors.append(k.reshape(shape))
    return vectors


def kernel_symbol(kernel: Kernel, eps: float, cells: int) -> np.ndarray:
    """ĉ_k m_k(eps) на частотах сетки, ноль вне |k|_inf <= K"""
    k = grid_wavenumbers(cells, kernel.dimension)
    norms = 2 * np.pi * np.sqrt(sum(v.astype(float) ** 2 for v in k))
    inside = np.ones(norms.shape, dtype=bool)
    for v in k:
        inside &= np.abs(v) <= kernel.fourier_cutoff
    symbol = np.zeros(norms.shape)
    nonzero = inside & (norms > 0)
    symbol[nonzero] = norms[nonzero] ** (-kernel.dimension)
    if eps > 0:
        if kernel.semigroup_order == SemigroupOrder.HALF:
            symbol *= np.exp(-norms * eps)
        else:
            symbol *= np.exp(-norms ** 2 * eps)
    return symbol


def _pad(spectrum: np.ndarray, size: int) -> np.ndarray:
    """Дополнение нулями коэффициентов (нормировка forward) до сетки size^d"""
    cells = spectrum.shape[0]
    index = np.mod(np.fft.fftfreq(cells, d=1.0 / cells).astype(int), size)
    padded = np.zeros((size,) * spectrum.ndim, dtype=complex)
    padded[np.ix_(*([index] * spectrum.ndim))] = spectrum
    return padded


def _truncate(spectrum: np.ndarray, cells: int) -> np.ndarray:
    size = spectrum.shape[0]
    index = np.mod(np.fft.fftfreq(cells, d=1.0 / cells).astype(int), size)
    return spectrum[np.ix_(*([index] * spectrum.ndim))]


class McKeanVlasovSolver:
    """Интегрирующий множитель для диффузии, явный шаг для переноса"""

    def __init__(self, save_every: int = 10):
        """
        Инициализация решателя

        Args:
            save_every: Сохранять состояние каждые save_every шагов
        """
        self.save_every = save_every

    @staticmethod
    def initial_state(measure: BaseMeasure, cells: int, dt: float) -> PdeState:
        """Начальная плотность в центрах ячеек"""
        density = measure.density_on(cells)
        return PdeState(density=density / np.mean(density), dt=dt)

    def mv_solve(self, initial: PdeState, kernel: Kernel, potential: Potential, t_end: float,
                 eps: float = 0.0, interacting: bool = True,
                 save_times: Optional[List[float]] = None) -> MvTrajectory:
        """
        Решение на [0, t_end]

        Args:
            initial: Начальная плотность
            kernel: Ядро на торе
            potential: Потенциал V
            t_end: Конечное время
            eps: Регуляризация ядра
            interacting: False: W = 0
            save_times: Дополнительные моменты, в которые шаг укорачивается и состояние сохраняется

        Returns:
            Траектория с монитором свободной энергии
        """
        if not kernel.is_torus:
            raise UnsupportedConfigurationError("McKean-Vlasov solver runs on the torus only")
        d = initial.dimension
        if d not in (1, 2) or d != kernel.dimension:
            raise ConfigurationError(f"McKean-Vlasov solver supports d in {{1, 2}}, got {d}")
        if t_end <= initial.time:
            raise ConfigurationError("t_end must exceed the initial time")
        try:
            cells = initial.cells
            k = grid_wavenumbers(cells, d)
            nyquist = np.ones((cells,) * d, dtype=bool)
            if cells % 2 == 0:
                for v in k:
                    nyquist &= v != -cells // 2
            derivatives = [np.where(nyquist, 2j * np.pi * v, 0.0) for v in k]
            laplacian = sum((2 * np.pi * v) ** 2 for v in k)
            symbol = kernel_symbol(kernel, eps, cells) if interacting else np.zeros((cells,) * d)
            centers = (np.arange(cells) + 0.5) / cells
            grid = np.stack(np.meshgrid(*([centers] * d), indexing="ij"), axis=-1)
            potential_gradient = [potential.gradient(grid)[..., a] for a in range(d)]
            potential_values = potential.value(grid)
            h = 1.0 / cells
            padded = 3 * cells // 2

            stops = sorted({float(t) for t in (save_times or []) if initial.time < t < t_end} | {float(t_end)})
            rho = np.array(initial.density, dtype=float)
            time, dt = initial.time, initial.dt
            trajectory = MvTrajectory(times=[time], densities=[rho.copy()],
                                      free_energy=[self.free_energy(rho, symbol, potential_values)])
            logger.info(f"MV solve: d={d}, cells={cells}, dt={dt}, t_end={t_end}")
            step = 0
            for stop in stops:
                while time < stop - 1e-14:
                    step_dt = min(dt, stop - time)
                    rho, step_dt, rejected = self._step(rho, step_dt, symbol, derivatives, laplacian,
                                                        potential_gradient, h, padded)
                    trajectory.rejected_steps += rejected
                    if rejected:
                        dt = step_dt
                    rho, clipped, correction = self._project(rho)
                    trajectory.mass_corrections.append(correction)
                    trajectory.clipped_negativity.append(clipped)
                    time = stop if stop - time <= step_dt + 1e-14 else time + step_dt
                    step += 1
                    if step % self.save_every == 0 or time >= stop - 1e-14:
                        trajectory.times.append(time)
                        trajectory.densities.append(rho.copy())
                        trajectory.free_energy.append(self.free_energy(rho, symbol, potential_values))
            logger.info(f"MV solve finished: {step} steps, {trajectory.rejected_steps} rejected, "
                        f"max mass correction {max(trajectory.mass_corrections, default=0.0):.2e}")
            return trajectory
        except Exception as e:
            logger.error(f"Error solving McKean-Vlasov equation: {e}")
            raise

    def _step(self, rho: np.ndarray, dt: float, symbol: np.ndarray, derivatives, laplacian,
              potential_gradient, h: float, padded: int) -> Tuple[np.ndarray, float, int]:
        """Шаг с интегрирующим множителем; отказ и деление dt пополам при нарушении CFL"""
        spectrum = np.fft.fftn(rho, norm="forward")
        velocity = []
        for derivative, grad_v in zip(derivatives, potential_gradient):
            field = np.real(np.fft.ifftn(derivative * symbol * spectrum, norm="forward"))
            velocity.append(field + grad_v)
        speed = np.sqrt(sum(u ** 2 for u in velocity))
        max_speed = float(np.max(speed))

        rejected = 0
        while max_speed * dt > h:
            rejected += 1
            if rejected > MAX_HALVINGS:
                raise IntegrationError(f"CFL condition not met after {MAX_HALVINGS} halvings "
                                       f"(max drift {max_speed:.3e})")
            dt /= 2
            logger.warning(f"CFL violation, dt halved to {dt:.3e}")

        rho_padded = np.real(np.fft.ifftn(_pad(spectrum, padded), norm="forward"))
        transport = np.zeros_like(spectrum)
        for derivative, u in zip(derivatives, velocity):
            u_padded = np.real(np.fft.ifftn(_pad(np.fft.fftn(u, norm="forward"), padded), norm="forward"))
            flux = _truncate(np.fft.fftn(rho_padded * u_padded, norm="forward"), rho.shape[0])
            transport += derivative * flux

        updated = np.exp(-laplacian * dt) * (spectrum + dt * transport)
        return np.real(np.fft.ifftn(updated, norm="forward")), dt, rejected

    @staticmethod
    def _project(rho: np.ndarray) -> Tuple[np.ndarray, float, float]:
        """Срезание отрицательной части и перенормировка массы"""
        clipped = float(-np.sum(np.minimum(rho, 0.0))) / rho.size
        if clipped > 0:
            logger.warning(f"Clipped negative density of mass {clipped:.3e}")
            rho = np.maximum(rho, 0.0)
        mass = float(np.mean(rho))
        correction = mass - 1.0
        if abs(correction) > MASS_LOG_THRESHOLD:
            logger.warning(f"Mass renormalization correction {correction:.3e}")
        return rho / mass, clipped, correction

    @staticmethod
    def free_energy(rho: np.ndarray, symbol: np.ndarray, potential_values: np.ndarray) -> float:
        """E[ρ] = ∫ρ ln ρ + ½∬W ρρ + ∫Vρ по квадратуре средних"""
        positive = rho > 0
        entropy = float(np.sum(rho[positive] * np.log(rho[positive]))) / rho.size
        spectrum = np.fft.fftn(rho, norm="forward")
        interaction = 0.5 * float(np.sum(symbol * np.abs(spectrum) ** 2))
        return entropy + interaction + float(np.mean(potential_values * rho))
