"""
Выборка из меры Гиббса M_{N,β} ∝ e^{-βI̊} μ̄^{⊗N} алгоритмом MALA
"""

from typing import Callable, List, Optional, Tuple
import logging

import numpy as np

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import (
    Kernel, BaseMeasure, MeasureKind, Potential, RandomStream, ChainConfig,
    GibbsRun, ConfigurationError, TuningError
)
from .kernel_calculator import KernelCalculator, synthesize
from .convolution import fourier_coefficients
from .energy_calculator import EnergyCalculator
from .measure_sampler import MeasureSampler
from .sde_integrator import SdeIntegrator

logger = logging.getLogger(__name__)

ACCEPTANCE_ERROR = (0.05, 0.95)
ACCEPTANCE_FLAG = (0.2, 0.9)
MAX_STEP_TORUS = 1.0
ADAPTATION_EXPONENT = 0.6
SE_BATCHES = 20


class GibbsTarget:
    """
    -log плотности U(x) = β·(1/2N)Σ_{i≠j}W + (1-β)Σφ(x_i) + ΣV(x_i), φ = W⋆μ̄

    При β = 1 совпадает с H_N. Без опорной меры φ = 0.
    """

    def __init__(self, kernel: Kernel, eps: float, potential: Potential, n: int, beta: float = 1.0,
                 reference: Optional[BaseMeasure] = None, interacting: bool = True,
                 energy_calculator: Optional[EnergyCalculator] = None):
        if beta < 0:
            raise ConfigurationError(f"beta must be nonnegative, got {beta}")
        self.kernel = kernel
        self.eps = eps
        self.potential = potential
        self.n = n
        self.beta = beta
        self.reference = reference
        self.interacting = interacting
        self.energy_calculator = energy_calculator or EnergyCalculator()
        self.kernel_calculator: KernelCalculator = self.energy_calculator.kernel_calculator
        self.forces = SdeIntegrator(self.kernel_calculator)
        self._field = None
        if interacting and kernel.is_torus and reference is not None and reference.kind != MeasureKind.UNIFORM:
            table = self.kernel_calculator.table(kernel)
            self._field = (table, table.weights(kernel.semigroup_order, eps)
                           * fourier_coefficients(reference, table.frequencies))

    def _pair(self, x: np.ndarray) -> float:
        if self.kernel.is_torus:
            return self.energy_calculator.pair_energy_spectral(self.kernel, self.eps, x)
        return self.energy_calculator.pair_energy_direct(self.kernel, self.eps, x)

    def potential_energy(self, x: np.ndarray) -> float:
        """U(x)"""
        value = float(np.sum(self.potential.value(x)))
        if self.interacting:
            value += self.beta * self._pair(x)
            if self._field is not None and self.beta != 1.0:
                table, coefficients = self._field
                value += (1.0 - self.beta) * float(np.sum(np.real(synthesize(coefficients, table.frequencies, x))))
        return value

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """∇U(x), форма (N, d)"""
        grad = self.potential.gradient(x)
        if self.interacting:
            # interaction_force дает (1/N)Σ_j ∇_1 W, ∇ пары равен тому же
            grad = grad + self.beta * self.forces.interaction_force(self.kernel, self.eps, x)
            if self._field is not None and self.beta != 1.0:
                table, coefficients = self._field
                for axis in range(x.shape[1]):
                    component = coefficients * (2j * np.pi * table.wave_vector(axis))
                    grad[:, axis] += (1.0 - self.beta) * np.real(synthesize(component, table.frequencies, x))
        return grad

    def observable(self, states: np.ndarray) -> np.ndarray:
        """I̊ относительно μ̄ (или H_N без опорной меры) для пакета состояний"""
        if self.reference is not None:
            if not self.interacting:
                return np.zeros(len(states))
            return self.energy_calculator.batch_energies(self.kernel, self.eps, self.reference, states)
        values = [float(np.sum(self.potential.value(x))) + (self._pair(x) if self.interacting else 0.0)
                  for x in states]
        return np.asarray(values)


class GibbsSampler:
    """MALA с подстройкой шага Роббинса-Монро в прогреве"""

    def __init__(self, energy_calculator: Optional[EnergyCalculator] = None,
                 sampler: Optional[MeasureSampler] = None, map_fn: Callable = map):
        self.energy_calculator = energy_calculator or EnergyCalculator()
        self.sampler = sampler or MeasureSampler()
        self.map_fn = map_fn

    def sample_gibbs(self, kernel: Kernel, potential: Potential, n: int, chain: ChainConfig,
                     stream: RandomStream, eps: float = 0.0, beta: float = 1.0,
                     reference: Optional[BaseMeasure] = None, interacting: bool = True,
                     keep_states: bool = False) -> GibbsRun:
        """
        Независимые цепи MALA для M_{N,β}

        Args:
            kernel: Ядро
            potential: Потенциал V
            n: Число частиц
            chain: Параметры цепи
            stream: Поток случайных чисел (дочерний на цепь)
            eps: Регуляризация ядра
            beta: Параметр семейства M_{N,β}
            reference: Опорная мера μ̄ (на торе)
            interacting: False: W = 0
            keep_states: Сохранять состояния цепей

        Returns:
            Результат выборки
        """
        if n < 1:
            raise ConfigurationError(f"n must be positive, got {n}")
        if not kernel.is_torus and reference is not None and reference.kind != MeasureKind.ATOMIC:
            raise ConfigurationError("free-space Gibbs sampling uses H_N without a continuous reference")
        target = GibbsTarget(kernel, eps, potential, n, beta, reference, interacting, self.energy_calculator)
        try:
            logger.info(f"Gibbs sampling: N={n}, beta={beta}, {chain.chains} chains of {chain.length}")
            results = list(self.map_fn(
                lambda c: self._run_chain(target, chain, stream.child("chain", c)), range(chain.chains)))
            states = np.concatenate([r[0] for r in results])
            per_chain = [target.observable(r[0]) for r in results]
            energies = np.concatenate(per_chain)
            acceptance = float(np.mean([r[1] for r in results]))
            step = float(np.mean([r[2] for r in results]))
            at_cap = all(r[3] for r in results)
            run = GibbsRun(
                n=n, beta=beta, chain_length=chain.length, burn_in=chain.burn_in, step_size=step,
                acceptance_rate=acceptance, mean_energy=float(np.mean(energies)),
                mean_energy_se=self._standard_error(per_chain),
                flagged=not ACCEPTANCE_FLAG[0] < acceptance < ACCEPTANCE_FLAG[1],
                energies=energies, states=states if keep_states else None)
            self._check_acceptance(acceptance, at_cap)
            if run.flagged:
                logger.warning(f"MALA acceptance {acceptance:.3f} outside {ACCEPTANCE_FLAG} for N={n}")
            return run
        except Exception as e:
            logger.error(f"Error sampling Gibbs measure for N={n}: {e}")
            raise

    @staticmethod
    def _check_acceptance(acceptance: float, at_cap: bool):
        """Ошибка подстройки; высокая приемлемость при максимальном шаге допустима (плоская цель)"""
        low, high = ACCEPTANCE_ERROR
        if acceptance <= low or (acceptance >= high and not at_cap):
            raise TuningError(f"MALA acceptance {acceptance:.3f} outside {ACCEPTANCE_ERROR} after tuning",
                              acceptance)

    def _initial(self, target: GibbsTarget, rng: np.random.Generator) -> np.ndarray:
        d = target.kernel.dimension
        if target.reference is not None:
            return self.sampler.sample_points(target.reference, target.n, rng)
        if target.kernel.is_torus:
            return rng.random((target.n, d))
        return rng.standard_normal((target.n, d)) * 0.5

    def _run_chain(self, target: GibbsTarget, chain: ChainConfig,
                   stream: RandomStream) -> Tuple[np.ndarray, float, float, bool]:
        rng = stream.generator()
        domain = target.kernel.domain
        x = self._initial(target, rng)
        u, grad = target.potential_energy(x), target.gradient(x)
        step = chain.step_size
        max_step = MAX_STEP_TORUS if domain.is_torus else np.inf
        kept: List[np.ndarray] = []
        accepted = 0
        for iteration in range(chain.burn_in + chain.length):
            proposal = domain.wrap(x - step * grad + np.sqrt(2 * step) * rng.standard_normal(x.shape))
            u_new, grad_new = target.potential_energy(proposal), target.gradient(proposal)
            forward = domain.displacement(proposal, x) + step * grad
            backward = domain.displacement(x, proposal) + step * grad_new
            log_ratio = (u - u_new) - (np.sum(backward ** 2) - np.sum(forward ** 2)) / (4 * step)
            accept = np.log(rng.random()) < log_ratio
            if accept:
                x, u, grad = proposal, u_new, grad_new
            if iteration < chain.burn_in:
                rate = (iteration + 1) ** -ADAPTATION_EXPONENT
                step = min(step * np.exp(rate * (float(accept) - chain.target_acceptance)), max_step)
                continue
            accepted += int(accept)
            if (iteration - chain.burn_in) % chain.thin == 0:
                kept.append(x.copy())
        acceptance = accepted / chain.length
        return np.stack(kept), acceptance, step, bool(step >= max_step)

    @staticmethod
    def _standard_error(chain_values: List[np.ndarray]) -> float:
        """SE среднего по батч-средним внутри цепей"""
        means = []
        for values in chain_values:
            batches = np.array_split(values, min(SE_BATCHES, len(values)))
            means.extend(float(np.mean(b)) for b in batches if len(b))
        if len(means) < 2:
            return 0.0
        return float(np.std(means, ddof=1) / np.sqrt(len(means)))
