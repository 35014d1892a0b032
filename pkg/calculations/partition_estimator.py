"""
Оценка статсуммы Z_{N,β} = E_{ρ̄^{⊗N}}[exp(-β I̊_W)] методом Монте-Карло,
sweep по N, точный перебор для атомарных мер и диагностики
"""

from typing import Callable, Iterable, List, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd
from scipy import special, stats

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import (
    Kernel, BaseMeasure, MeasureKind, RandomStream, Verdict,
    PartitionEstimate, PartitionSweep, EnumeratedPartition, LayerCakeDiagnostic, LayerCakeRow,
    ConfigurationError, EstimationError
)
from .energy_calculator import EnergyCalculator
from .measure_sampler import MeasureSampler

logger = logging.getLogger(__name__)

MIN_SAMPLES = 1000
MAX_DISCARD_FRACTION = 1e-3
MAX_ENUMERATION = 1_000_000
BOOTSTRAP_RESAMPLES = 999
BOOTSTRAP_BATCH = 100


class PartitionEstimator:
    """Монте-Карло для Z_{N,β} с детерминированным разбиением на блоки"""

    def __init__(self, energy_calculator: Optional[EnergyCalculator] = None,
                 sampler: Optional[MeasureSampler] = None, chunk_size: int = 2000,
                 map_fn: Optional[Callable[[Callable, Iterable], Iterable]] = None,
                 bootstrap_resamples: int = BOOTSTRAP_RESAMPLES):
        """
        Инициализация

        Args:
            energy_calculator: Калькулятор энергии
            sampler: Выборка из ρ̄
            chunk_size: Размер блока выборок (не зависит от числа исполнителей)
            map_fn: Упорядоченный map (пул исполнителей или встроенный map)
            bootstrap_resamples: Число бутстреп-повторов
        """
        self.energy_calculator = energy_calculator or EnergyCalculator()
        self.sampler = sampler or MeasureSampler()
        self.chunk_size = chunk_size
        self.map_fn = map_fn or map
        self.bootstrap_resamples = bootstrap_resamples

    # Выборка энергий

    def sample_energies(self, kernel: Kernel, measure: BaseMeasure, n: int, eps: float,
                        samples: int, stream: RandomStream) -> np.ndarray:
        """
        Энергии I̊ для samples независимых конфигураций из ρ̄^{⊗n}

        Блок i использует поток stream.child(i); порядок сборки фиксирован.
        """
        d = kernel.dimension
        starts = list(range(0, samples, self.chunk_size))

        def run_chunk(index: int) -> np.ndarray:
            count = min(self.chunk_size, samples - starts[index])
            rng = stream.child(index).generator()
            points = self.sampler.sample_points(measure, count * n, rng).reshape(count, n, d)
            return self.energy_calculator.batch_energies(kernel, eps, measure, points)

        chunks = list(self.map_fn(run_chunk, range(len(starts))))
        return np.concatenate(chunks)

    # Оценка одной статсуммы

    def estimate_partition(self, kernel: Kernel, measure: BaseMeasure, n: int, beta: float, eps: float,
                           samples: int, stream: RandomStream) -> PartitionEstimate:
        """
        Оценка Z_{N,β}

        Args:
            kernel: Ядро
            measure: Базовая мера
            n: Число частиц
            beta: Обратная температура, β >= 0
            eps: Регуляризация ядра
            samples: Число выборок, не меньше 1000
            stream: Поток случайных чисел

        Returns:
            Оценка с бутстреп-интервалом и ESS
        """
        self._check_request(beta, samples)
        try:
            logger.info(f"Estimating Z for N={n}, beta={beta}, eps={eps}, {samples} samples")
            energies = self.sample_energies(kernel, measure, n, eps, samples, stream)
            return self.estimate_from_energies(energies, n, beta, eps, stream)
        except Exception as e:
            logger.error(f"Error estimating partition function: {e}")
            raise

    @staticmethod
    def _check_request(beta: float, samples: int):
        if samples < MIN_SAMPLES:
            raise ConfigurationError(f"at least {MIN_SAMPLES} samples are required, got {samples}")
        if beta < 0:
            raise ConfigurationError(f"beta must be nonnegative, got {beta}")

    def estimate_from_energies(self, energies: np.ndarray, n: int, beta: float, eps: float,
                               stream: RandomStream) -> PartitionEstimate:
        """Оценка Z по готовому набору энергий"""
        energies = np.asarray(energies, dtype=float)
        finite = np.isfinite(energies)
        discarded = int((~finite).sum())
        if discarded > MAX_DISCARD_FRACTION * len(energies):
            raise EstimationError(f"{discarded} of {len(energies)} energies are not finite")
        if discarded:
            logger.warning(f"Discarded {discarded} non-finite energies for N={n}")
        energies = energies[finite]
        count = len(energies)
        mean_energy = float(energies.mean())
        seed = stream.seed

        if beta == 0:
            return PartitionEstimate(
                n=n, beta=beta, eps=eps, samples=count, discarded=discarded, mean=1.0, log_mean=0.0,
                ci_halfwidth=0.0, ci_low=1.0, ci_high=1.0, standard_error=0.0, log_standard_error=0.0,
                ess=float(count), mean_energy=mean_energy, seed=seed)

        log_weights = -beta * energies
        log_mean = float(special.logsumexp(log_weights) - np.log(count))
        normalized = np.exp(log_weights - log_weights.max())
        ess = float(normalized.sum() ** 2 / np.sum(normalized ** 2))
        weights = np.exp(log_weights)
        mean = float(np.exp(log_mean))
        standard_error = float(weights.std(ddof=1) / np.sqrt(count))

        if np.ptp(weights) == 0:
            low = high = float(weights[0])
        else:
            result = stats.bootstrap(
                (weights,), np.mean, n_resamples=self.bootstrap_resamples, confidence_level=0.95,
                method="percentile", vectorized=True, batch=BOOTSTRAP_BATCH,
                random_state=stream.child("bootstrap").generator())
            low, high = float(result.confidence_interval.low), float(result.confidence_interval.high)

        estimate = PartitionEstimate(
            n=n, beta=beta, eps=eps, samples=count, discarded=discarded, mean=mean, log_mean=log_mean,
            ci_halfwidth=max(0.0, (high - low) / 2.0), ci_low=low, ci_high=high,
            standard_error=standard_error, log_standard_error=standard_error / mean if mean > 0 else 0.0,
            ess=min(ess, float(count)), mean_energy=mean_energy, seed=seed)
        logger.info(f"Z(N={n}, beta={beta}) = {mean:.6f} +/- {estimate.ci_halfwidth:.6f}, ESS {ess:.1f}")
        return estimate

    # Sweep по N

    def sweep_partition(self, kernel: Kernel, measure: BaseMeasure, n_values: Sequence[int], beta: float,
                        samples: int, stream: RandomStream, eps: float = 0.0,
                        ess_threshold: float = 50.0) -> PartitionSweep:
        """
        Оценки Z_{N,β} по возрастающим N с вердиктами ограниченности

        Args:
            kernel: Ядро
            measure: Базовая мера
            n_values: Возрастающие N
            beta: Обратная температура
            samples: Число выборок на N
            stream: Поток случайных чисел (N-й поток общий для всех β)
            eps: Регуляризация
            ess_threshold: Минимально допустимый ESS

        Returns:
            Sweep с текущим максимумом и вердиктами
        """
        n_values = list(n_values)
        if not n_values or any(b <= a for a, b in zip(n_values, n_values[1:])):
            raise ConfigurationError("n_values must be a non-empty increasing list")
        self._check_request(beta, samples)
        try:
            estimates = [self.estimate_partition(kernel, measure, n, beta, eps, samples, stream.child("N", n))
                         for n in n_values]
            return self.summarize_sweep(kernel, measure, estimates, eps, ess_threshold)
        except Exception as e:
            logger.error(f"Error in partition sweep: {e}")
            raise

    def summarize_sweep(self, kernel: Kernel, measure: BaseMeasure, estimates: List[PartitionEstimate],
                        eps: float, ess_threshold: float) -> PartitionSweep:
        """Текущий максимум, граница Йенсена и вердикты sweep"""
        means = np.array([e.mean for e in estimates])
        cis = np.array([e.ci_halfwidth for e in estimates])
        running_max = np.maximum.accumulate(means)
        jensen = np.array([np.exp(-e.beta * self.energy_calculator.mean_energy(kernel, eps, measure, e.n))
                           for e in estimates])

        if len(estimates) < 4:
            trend = Verdict.INCONCLUSIVE
        else:
            quarter = len(estimates) // 4
            first, last = means[:quarter].mean(), means[-quarter:].mean()
            trend = Verdict.of(bool(last <= first + 2 * cis[-quarter:].max()))
        if np.all(jensen >= 1.0 - 1e-12):
            lower = Verdict.of(bool(np.all(means + cis >= 1.0)))
        else:
            lower = Verdict.INCONCLUSIVE
        jensen_verdict = Verdict.of(bool(np.all(means + cis >= jensen)))
        ess_verdict = Verdict.of(all(e.ess >= ess_threshold for e in estimates))
        logger.info(f"Sweep verdicts: trend {trend.value}, lower {lower.value}, "
                    f"jensen {jensen_verdict.value}, ess {ess_verdict.value}")
        return PartitionSweep(
            estimates=estimates, running_max=running_max.tolist(), jensen_bounds=jensen.tolist(),
            trend_verdict=trend, lower_verdict=lower, jensen_verdict=jensen_verdict, ess_verdict=ess_verdict)

    # Точный перебор

    def enumerate_partition(self, kernel: Kernel, measure: BaseMeasure, n: int, beta: float,
                            eps: float = 0.0) -> EnumeratedPartition:
        """
        Z_{N,β} для атомарной меры суммированием по всем m^N конфигурациям

        Args:
            kernel: Ядро
            measure: Атомарная мера с m атомами
            n: Число частиц
            beta: Обратная температура
            eps: Регуляризация

        Returns:
            Точное значение Z и E[I̊]
        """
        if measure.kind != MeasureKind.ATOMIC:
            raise ConfigurationError("enumeration requires an atomic measure")
        m = len(measure.weights)
        total = m ** n
        if total > MAX_ENUMERATION:
            raise ConfigurationError(f"enumeration over {total} configurations exceeds {MAX_ENUMERATION}")
        table = self.energy_calculator.atom_table(kernel, eps, measure)
        indices = np.indices((m,) * n).reshape(n, -1).T
        counts = np.stack([(indices == a).sum(axis=1) for a in range(m)], axis=1)
        probabilities = np.prod(measure.weights[indices], axis=1)
        energies = self.energy_calculator.energy_from_counts(table, measure.weights, counts)
        z = float(np.sum(probabilities * np.exp(-beta * energies)))
        logger.info(f"Enumerated Z over {total} configurations: {z:.8f}")
        return EnumeratedPartition(n=n, beta=beta, configurations=total, mean=z, log_mean=float(np.log(z)),
                                   mean_energy=float(np.sum(probabilities * energies)))

    # Диагностики

    def beta_diagnostic(self, energies: np.ndarray, n: int, betas: Sequence[float], eps: float,
                        stream: RandomStream) -> Tuple[pd.DataFrame, Verdict]:
        """
        Монотонность и выпуклость β ↦ log Z на общих случайных числах

        Args:
            energies: Общий набор энергий
            n: Число частиц
            betas: Возрастающие β (не меньше трех)
            eps: Регуляризация
            stream: Поток случайных чисел

        Returns:
            Таблица (β, log Z, SE) и вердикт
        """
        betas = sorted(float(b) for b in betas)
        if len(betas) < 3:
            raise ConfigurationError("beta diagnostic needs at least three betas")
        estimates = [self.estimate_from_energies(energies, n, b, eps, stream) for b in betas]
        logs = np.array([e.log_mean for e in estimates])
        ses = np.array([e.log_standard_error for e in estimates])
        slopes = np.diff(logs) / np.diff(betas)
        convex = bool(np.all(np.diff(slopes) >= -1e-10 * (1 + np.abs(slopes[1:]))))
        increasing = bool(np.all(np.diff(logs) >= -2 * (ses[1:] + ses[:-1])))
        frame = pd.DataFrame({"beta": betas, "log_mean": logs, "log_se": ses})
        frame["increasing"] = increasing
        frame["convex"] = convex
        logger.info(f"Beta diagnostic for N={n}: increasing {increasing}, convex {convex}")
        return frame, Verdict.of(convex and increasing)

    def layer_cake_diagnostic(self, energies: np.ndarray, n: int, beta: float, moment_order: int = 4,
                              reference: Optional[np.ndarray] = None,
                              levels: Sequence[float] = (1.0, 2.0, 3.0, 4.0, 5.0)) -> LayerCakeDiagnostic:
        """
        Формула слоев для E[e^{-βI̊}] и хвосты Чебышева

        Args:
            energies: Энергии I̊
            n: Число частиц
            beta: Обратная температура
            moment_order: Порядок момента p в оценке Чебышева
            reference: Регуляризованные энергии I̊_{W_eps} тех же конфигураций
            levels: Уровни s

        Returns:
            Диагностика: прямое среднее, среднее по слоям и строки хвостов
        """
        energies = np.asarray(energies, dtype=float)
        weights = np.exp(-beta * energies)
        direct = float(weights.mean())
        upper = self._survival_integral(weights, 1.0, float(max(weights.max(), 1.0)))
        lower = self._survival_integral(weights, 0.0, 1.0)
        layer_cake = lower + upper

        deviation = energies - (reference if reference is not None else energies.mean())
        moment = float(np.mean(np.abs(beta * deviation) ** moment_order))
        rows = [LayerCakeRow(level=s, tail_probability=float(np.mean(beta * deviation <= -s)),
                             chebyshev_bound=moment / s ** moment_order) for s in levels]
        logger.info(f"Layer cake for N={n}: direct {direct:.6f}, layered {layer_cake:.6f}")
        return LayerCakeDiagnostic(n=n, beta=beta, moment_order=moment_order, direct_mean=direct,
                                   layer_cake_mean=layer_cake, rows=rows)

    @staticmethod
    def _survival_integral(values: np.ndarray, low: float, high: float) -> float:
        """∫_low^high P[w > t] dt для эмпирического распределения (точно)"""
        if high <= low:
            return 0.0
        ordered = np.sort(values)
        inside = ordered[(ordered > low) & (ordered < high)]
        breaks = np.concatenate([[low], inside, [high]])
        breaks = np.unique(breaks)
        survival = 1.0 - np.searchsorted(ordered, breaks[:-1], side="right") / len(ordered)
        return float(np.sum(survival * np.diff(breaks)))

    @staticmethod
    def integral_bound_constant(estimate_double_beta: PartitionEstimate) -> float:
        """Постоянная C = log Z_{N,2β} / 2 в оценке -(β/N) E[I̊] <= H̄/2 + C/N"""
        return estimate_double_beta.log_mean / 2.0
