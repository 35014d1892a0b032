"""
Схема Эйлера-Маруямы для системы взаимодействующих частиц
dX^i = (-∇V(X^i) - (1/N) Σ_{j≠i} ∇_1 W_eps(X^i, X^j)) dt + √2 dB^i
"""

from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import (
    Kernel, Potential, Configuration, SdeState, RandomStream,
    ConfigurationError, IntegrationError
)
from .kernel_calculator import KernelCalculator, structure_factor, synthesize

logger = logging.getLogger(__name__)


def noise_generators(stream: RandomStream, n: int) -> List[np.random.Generator]:
    """Независимый генератор шума для каждой частицы: stream.child("particle", i)"""
    return [stream.child("particle", i).generator() for i in range(n)]


class SdeIntegrator:
    """Шаги Эйлера-Маруямы с ограничением сноса"""

    def __init__(self, kernel_calculator: Optional[KernelCalculator] = None):
        self.kernel_calculator = kernel_calculator or KernelCalculator()

    def interaction_force(self, kernel: Kernel, eps: float, points: np.ndarray) -> np.ndarray:
        """
        (1/N) Σ_{j≠i} ∇_1 W_eps(x_i, x_j) для всех i

        На торе через структурный фактор: Σ_j ∇W(x_i - x_j) = Re Σ_k ĉ_k m_k 2πik e^{2πik·x_i} S_k,
        слагаемое j = i равно нулю по нечетности.
        """
        n, d = points.shape
        if n < 2:
            return np.zeros_like(points)
        # d = 1 при eps = 0: попарно по замкнутой форме -ctg(πx)
        if kernel.is_torus and (eps > 0 or d > 1):
            table = self.kernel_calculator.table(kernel)
            weights = self.kernel_calculator.gradient_weights(kernel, eps) * structure_factor(table.frequencies, points)
            force = np.empty_like(points)
            for axis in range(d):
                component = weights * (2j * np.pi * table.wave_vector(axis))
                force[:, axis] = np.real(synthesize(component, table.frequencies, points))
            return force / n
        i, j = np.triu_indices(n, k=1)
        delta = points[i] - points[j]
        grad = self.kernel_calculator.gradient_profile(kernel, eps, delta)
        force = np.zeros_like(points)
        np.add.at(force, i, grad)
        np.add.at(force, j, -grad)
        return force / n

    def drift(self, kernel: Kernel, eps: float, potential: Potential, points: np.ndarray,
              interacting: bool = True) -> np.ndarray:
        """-∇V(x_i) - (1/N) Σ_{j≠i} ∇_1 W_eps(x_i, x_j)"""
        drift = -potential.gradient(points)
        if interacting:
            drift = drift - self.interaction_force(kernel, eps, points)
        return drift

    def sde_step(self, state: SdeState, kernel: Kernel, potential: Potential,
                 generators: Sequence[np.random.Generator], interacting: bool = True,
                 noise: Optional[np.ndarray] = None, dt_max: Optional[float] = None) -> SdeState:
        """
        Один шаг Эйлера-Маруямы

        Args:
            state: Текущее состояние
            kernel: Ядро
            potential: Внешний потенциал
            generators: Генераторы шума по частицам
            interacting: False: W = 0
            noise: Явные ξ формы (N, d) вместо генераторов
            dt_max: Допустимый максимум шага

        Returns:
            Новое состояние
        """
        if dt_max is not None and state.dt > dt_max:
            raise ConfigurationError(f"dt = {state.dt} exceeds dt_max = {dt_max}")
        points = state.config.points
        n, d = points.shape
        try:
            drift = self.drift(kernel, state.eps_reg, potential, points, interacting)
        except Exception as e:
            logger.error(f"Error evaluating drift at t={state.time:.4f}: {e}")
            raise IntegrationError(f"drift evaluation failed: {e}", self._closest_pair(kernel, points)) from e

        magnitude = np.linalg.norm(drift, axis=1)
        capped = magnitude > state.force_cap
        activations = int(capped.sum())
        if activations:
            drift[capped] *= (state.force_cap / magnitude[capped])[:, None]
            logger.warning(f"Force cap active for {activations} particles at t={state.time:.4f}")

        if noise is None:
            noise = np.stack([g.standard_normal(d) for g in generators])
        moved = points + state.dt * drift + np.sqrt(2 * state.dt) * noise
        if not np.all(np.isfinite(moved)):
            distance = self._closest_pair(kernel, points)
            logger.error(f"Non-finite position at t={state.time:.4f}, closest pair distance {distance:.3e}")
            raise IntegrationError("non-finite particle position", distance)
        config = Configuration(domain=kernel.domain, points=kernel.domain.wrap(moved))
        return state.model_copy(update={
            "config": config, "time": state.time + state.dt,
            "cap_activations": state.cap_activations + activations,
        })

    def run_sde(self, state: SdeState, kernel: Kernel, potential: Potential, steps: int,
                stream: RandomStream, interacting: bool = True, snapshot_every: Optional[int] = None,
                dt_max: Optional[float] = None) -> Tuple[SdeState, Optional[pd.DataFrame]]:
        """
        Интегрирование на steps шагов

        Args:
            state: Начальное состояние
            kernel: Ядро
            potential: Потенциал
            steps: Число шагов
            stream: Поток шума (дочерний поток на частицу)
            interacting: False: W = 0
            snapshot_every: Шаг сохранения снимков (None - без снимков)
            dt_max: Допустимый максимум шага

        Returns:
            Конечное состояние и снимки (t, particle, x0..)
        """
        generators = noise_generators(stream, state.config.n)
        snapshots = [] if snapshot_every else None
        logger.info(f"SDE run: N={state.config.n}, {steps} steps, dt={state.dt}, eps_reg={state.eps_reg}")
        for step in range(steps):
            if snapshots is not None and step % snapshot_every == 0:
                snapshots.append(self._snapshot(state))
            state = self.sde_step(state, kernel, potential, generators, interacting, dt_max=dt_max)
        if snapshots is not None:
            snapshots.append(self._snapshot(state))
        if state.cap_activations:
            logger.warning(f"SDE run finished with {state.cap_activations} force-cap activations")
        frame = pd.concat(snapshots, ignore_index=True) if snapshots else None
        return state, frame

    def advance(self, state: SdeState, kernel: Kernel, potential: Potential, t_target: float,
                generators: Sequence[np.random.Generator], interacting: bool = True) -> SdeState:
        """Шаги до момента t_target (последний шаг укорачивается)"""
        while state.time < t_target - 1e-12:
            remaining = t_target - state.time
            if remaining < state.dt:
                step_size = state.dt
                short = state.model_copy(update={"dt": remaining})
                state = self.sde_step(short, kernel, potential, generators, interacting)
                return state.model_copy(update={"dt": step_size, "time": t_target})
            state = self.sde_step(state, kernel, potential, generators, interacting)
        return state

    @staticmethod
    def _snapshot(state: SdeState) -> pd.DataFrame:
        points = state.config.points
        frame = pd.DataFrame(points, columns=[f"x{a}" for a in range(points.shape[1])])
        frame.insert(0, "particle", np.arange(len(points)))
        frame.insert(0, "t", state.time)
        return frame

    @staticmethod
    def _closest_pair(kernel: Kernel, points: np.ndarray) -> float:
        finite = points[np.all(np.isfinite(points), axis=1)]
        if len(finite) < 2:
            return float("nan")
        i, j = np.triu_indices(len(finite), k=1)
        delta = kernel.domain.displacement(finite[i], finite[j])
        return float(np.min(np.linalg.norm(delta, axis=1)))
