"""
Модулированная энергия взаимодействия (1/N) I̊_{W_eps}[η^N_{X_t}] относительно ρ̄_t
"""

from typing import Callable, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
from scipy import stats

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import (
    Kernel, BaseMeasure, MeasureKind, Potential, SdeState, RandomStream, Verdict,
    ModulatedEnergyRow, SlopeFit, ConfigurationError, UnsupportedConfigurationError
)
from .energy_calculator import EnergyCalculator
from .measure_sampler import MeasureSampler
from .sde_integrator import SdeIntegrator, noise_generators
from .mckean_vlasov_solver import McKeanVlasovSolver

logger = logging.getLogger(__name__)

CLOSED_FORM_SIGMAS = 4.0
# Среднее не отличимо от нуля при |mean| <= 2 SE, наклон не подгоняется
RESOLVED_SIGMAS = 2.0


class ModulatedEnergyTracker:
    """Реплики СДУ против решения уравнения Маккина-Власова"""

    def __init__(self, integrator: Optional[SdeIntegrator] = None,
                 solver: Optional[McKeanVlasovSolver] = None,
                 energy_calculator: Optional[EnergyCalculator] = None,
                 sampler: Optional[MeasureSampler] = None,
                 map_fn: Callable = map):
        self.energy_calculator = energy_calculator or EnergyCalculator()
        self.integrator = integrator or SdeIntegrator(self.energy_calculator.kernel_calculator)
        self.solver = solver or McKeanVlasovSolver()
        self.sampler = sampler or MeasureSampler()
        self.map_fn = map_fn

    def reference_measures(self, kernel: Kernel, measure: BaseMeasure, potential: Potential,
                           t_grid: Sequence[float], eps_reg: float, pde_cells: int, pde_dt: float,
                           interacting: bool = True) -> Dict[float, BaseMeasure]:
        """ρ̄_t в моментах t_grid: решение уравнения с кубической интерполяцией по времени"""
        measures = {0.0: measure}
        later = [t for t in t_grid if t > 0]
        if not later:
            return measures
        if measure.kind == MeasureKind.UNIFORM and potential.is_zero:
            return {**measures, **{t: measure for t in later}}
        initial = self.solver.initial_state(measure, pde_cells, pde_dt)
        trajectory = self.solver.mv_solve(initial, kernel, potential, max(later), eps=eps_reg,
                                          interacting=interacting, save_times=later)
        for t in later:
            density = np.maximum(trajectory.density_at(t), 0.0)
            measures[t] = BaseMeasure.from_grid(kernel.domain, density)
        return measures

    def modulated_energy_sweep(self, kernel: Kernel, measure: BaseMeasure, potential: Potential,
                               n_values: Sequence[int], t_grid: Sequence[float], replicas: int,
                               stream: RandomStream, dt: float = 1e-3, eps_reg: float = 1e-3,
                               pde_cells: int = 128, pde_dt: float = 1e-4, interacting: bool = True,
                               slope_range: Tuple[float, float] = (-1.3, -0.7),
                               force_cap: Optional[float] = None
                               ) -> Tuple[List[ModulatedEnergyRow], List[SlopeFit], Verdict]:
        """
        Таблица E[(1/N) I̊] по (N, t) и наклоны по N

        Args:
            kernel: Ядро на торе
            measure: Начальная мера ρ̄_0
            potential: Потенциал V
            n_values: Значения N
            t_grid: Моменты времени
            replicas: Независимые прогоны на N
            stream: Поток случайных чисел
            dt: Шаг СДУ
            eps_reg: Регуляризация ядра (в сносе и в энергии)
            pde_cells: Сетка решателя уравнения
            pde_dt: Шаг решателя уравнения
            interacting: False: W = 0
            slope_range: Допустимый диапазон наклона
            force_cap: Ограничение сноса (по умолчанию 10/√dt)

        Returns:
            Строки таблицы, наклоны по t и вердикт
        """
        if not kernel.is_torus:
            raise UnsupportedConfigurationError("modulated energy sweep runs on the torus")
        if replicas < 2 or not n_values or not t_grid:
            raise ConfigurationError("sweep needs n_values, t_grid and at least two replicas")
        if min(t_grid) < 0:
            raise ConfigurationError("t_grid must be nonnegative")
        times = sorted({float(t) for t in t_grid})
        try:
            logger.info(f"Modulated energy sweep: N={list(n_values)}, t={times}, {replicas} replicas, "
                        f"eps_reg={eps_reg}")
            measures = self.reference_measures(kernel, measure, potential, times, eps_reg,
                                               pde_cells, pde_dt, interacting)
            rows: List[ModulatedEnergyRow] = []
            closed_ok: List[bool] = []
            for n in n_values:
                def replica(r: int, n: int = n) -> np.ndarray:
                    return self._replica(kernel, potential, measures, times, n, dt, eps_reg,
                                         interacting, force_cap, stream.child("N", n, "replica", r))
                values = np.stack(list(self.map_fn(replica, range(replicas))))
                means = values.mean(axis=0)
                errors = values.std(axis=0, ddof=1) / np.sqrt(replicas)
                for t, mean, se in zip(times, means, errors):
                    rows.append(ModulatedEnergyRow(n=n, t=t, mean=float(mean), standard_error=float(se),
                                                   replicas=replicas))
                if times[0] == 0.0:
                    closed = self.energy_calculator.mean_energy(kernel, eps_reg, measure, n) / n
                    closed_ok.append(bool(abs(means[0] - closed) <= CLOSED_FORM_SIGMAS * errors[0] + 1e-12))
                    logger.info(f"N={n}: t=0 modulated energy {means[0]:.3e} vs closed form {closed:.3e}")

            fits = [self._fit(rows, t, slope_range) for t in times]
            verdicts = [Verdict.of(all(closed_ok))] if closed_ok else []
            resolved = [fit for fit in fits if np.isfinite(fit.slope)]
            if resolved:
                verdicts.append(Verdict.of(all(fit.in_range for fit in resolved)))
            else:
                verdicts.append(Verdict.INCONCLUSIVE)
            return rows, fits, Verdict.combine(verdicts)
        except Exception as e:
            logger.error(f"Error in modulated energy sweep: {e}")
            raise

    def _replica(self, kernel: Kernel, potential: Potential, measures: Dict[float, BaseMeasure],
                 times: List[float], n: int, dt: float, eps_reg: float, interacting: bool,
                 force_cap: Optional[float], stream: RandomStream) -> np.ndarray:
        config = self.sampler.sample(measures[0.0], n, stream.child("initial"))
        generators = noise_generators(stream.child("noise"), n)
        state = SdeState.initial(config, dt, eps_reg, force_cap)
        values = np.empty(len(times))
        for index, t in enumerate(times):
            state = self.integrator.advance(state, kernel, potential, t, generators, interacting)
            energy = self.energy_calculator.interaction_energy(kernel, eps_reg, measures[t], state.config)
            values[index] = energy.total / n
        return values

    @staticmethod
    def _fit(rows: List[ModulatedEnergyRow], t: float, slope_range: Tuple[float, float]) -> SlopeFit:
        """Наклон log|E| по log N; NaN, если средние не отличимы от нуля"""
        selected = [row for row in rows if row.t == t]
        resolved = all(abs(row.mean) > RESOLVED_SIGMAS * row.standard_error and row.mean != 0
                       for row in selected)
        if len(selected) < 3 or not resolved:
            return SlopeFit(t=t, slope=float("nan"), intercept=float("nan"), stderr=float("nan"),
                            in_range=False)
        fit = stats.linregress(np.log([row.n for row in selected]), np.log([abs(row.mean) for row in selected]))
        low, high = slope_range
        return SlopeFit(t=t, slope=float(fit.slope), intercept=float(fit.intercept),
                        stderr=float(fit.stderr), in_range=bool(low <= fit.slope <= high))
