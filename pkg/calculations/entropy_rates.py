"""
Энтропийные скорости меры Гиббса: log Z_N двумя способами,
H̄[M_N|μ̄^{⊗N}] и H̄[μ̄^{⊗N}|M_N], наклоны по N
"""

from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
from scipy import stats

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import (
    Kernel, BaseMeasure, Potential, RandomStream, ChainConfig, MeanFieldMinimizer,
    EntropyRateRow, SlopeFit, Verdict, UnsupportedConfigurationError
)
from .kernel_calculator import fold_to_grid
from .convolution import fourier_coefficients
from .partition_estimator import PartitionEstimator
from .gibbs_sampler import GibbsSampler
from .mean_field_solver import MeanFieldSolver

logger = logging.getLogger(__name__)

AGREEMENT_SIGMAS = 3.0
NONNEGATIVITY_SIGMAS = 3.0
UNIFORM_TOLERANCE = 1e-12


class EntropyRateEstimator:
    """Выборка по значимости и термодинамическое интегрирование для log Z_N"""

    def __init__(self, partition_estimator: Optional[PartitionEstimator] = None,
                 gibbs_sampler: Optional[GibbsSampler] = None,
                 mean_field_solver: Optional[MeanFieldSolver] = None):
        self.partition_estimator = partition_estimator or PartitionEstimator()
        self.energy_calculator = self.partition_estimator.energy_calculator
        self.gibbs_sampler = gibbs_sampler or GibbsSampler(self.energy_calculator)
        self.mean_field_solver = mean_field_solver or MeanFieldSolver()

    @staticmethod
    def reference_measure(kernel: Kernel, minimizer: MeanFieldMinimizer) -> BaseMeasure:
        """μ̄ как сеточная мера; постоянная плотность заменяется точной равномерной"""
        density = minimizer.density
        if np.ptp(density) <= UNIFORM_TOLERANCE:
            return BaseMeasure.uniform(kernel.domain)
        return BaseMeasure.from_grid(kernel.domain, density)

    def log_z_importance(self, kernel: Kernel, reference: BaseMeasure, n: int, samples: int, eps: float,
                         stream: RandomStream, beta: float = 1.0) -> Tuple[float, float]:
        """log E_{μ̄^{⊗N}}[e^{-βI̊}] и его SE через модуль статсумм"""
        estimate = self.partition_estimator.estimate_partition(kernel, reference, n, beta, eps, samples, stream)
        return estimate.log_mean, estimate.log_standard_error

    def log_z_thermodynamic(self, kernel: Kernel, potential: Potential, reference: BaseMeasure, n: int,
                            chain: ChainConfig, nodes: int, eps: float, stream: RandomStream,
                            interacting: bool = True) -> Tuple[float, float]:
        """
        log Z_N = -∫_0^1 E_{M_{N,β}}[I̊] dβ по квадратуре Гаусса-Лежандра

        Returns:
            Оценка и SE (квадратурные веса на SE узлов)
        """
        x, w = np.polynomial.legendre.leggauss(nodes)
        betas, weights = 0.5 * (x + 1.0), 0.5 * w
        means, errors = [], []
        for index, beta in enumerate(betas):
            run = self.gibbs_sampler.sample_gibbs(kernel, potential, n, chain, stream.child("node", index),
                                                  eps=eps, beta=float(beta), reference=reference,
                                                  interacting=interacting)
            means.append(run.mean_energy)
            errors.append(run.mean_energy_se)
            logger.debug(f"TI node beta={beta:.4f}: E[I] = {run.mean_energy:.5f} +- {run.mean_energy_se:.5f}")
        value = -float(np.dot(weights, means))
        se = float(np.sqrt(np.dot(weights ** 2, np.square(errors))))
        return value, se

    def squared_kernel_mass(self, kernel: Kernel, eps: float, reference: BaseMeasure) -> float:
        """∬W_eps² dμ̄dμ̄ по коэффициентам W² на сетке без наложения частот"""
        kc = self.energy_calculator.kernel_calculator
        table = kc.table(kernel)
        cutoff = table.cutoff
        resolution = 4 * cutoff + 2
        values = np.real(fold_to_grid(table.weights(kernel.semigroup_order, eps), table.frequencies, resolution))
        squared = np.fft.fftn(values ** 2, norm="forward")
        frequencies = np.arange(-2 * cutoff, 2 * cutoff + 1)
        index = np.ix_(*([np.mod(frequencies, resolution)] * kernel.dimension))
        coefficients = np.real(squared[index])
        rho_hat = fourier_coefficients(reference, frequencies)
        return float(np.sum(coefficients * np.abs(rho_hat) ** 2))

    def entropy_bound_terms(self, kernel: Kernel, reference: BaseMeasure, n: int, log_z: float,
                            samples: int, eps: float, stream: RandomStream) -> Dict[str, float]:
        """Члены цепочки H[M_N|μ̄^{⊗N}] <= ∬W²/Z_N + Z_{N,2}/Z_N - log Z_N"""
        w2 = self.squared_kernel_mass(kernel, eps, reference)
        log_z2, log_z2_se = self.log_z_importance(kernel, reference, n, samples, eps, stream, beta=2.0)
        z = np.exp(log_z)
        bound = w2 / z + np.exp(log_z2 - log_z) - log_z
        return {"w2": w2, "log_z2": log_z2, "log_z2_se": log_z2_se, "bound": float(bound)}

    def entropy_rates(self, kernel: Kernel, potential: Potential, n_values: Sequence[int], chain: ChainConfig,
                      stream: RandomStream, cells: int = 128, damping: float = 0.5, tol: float = 1e-10,
                      max_iter: int = 500, is_samples: int = 20_000, ti_nodes: int = 8, eps: float = 0.0,
                      interacting: bool = True, cross_check_n: Optional[int] = 16,
                      slope_tolerance: float = 0.3
                      ) -> Tuple[List[EntropyRateRow], MeanFieldMinimizer, Dict[str, SlopeFit], Dict[str, Verdict]]:
        """
        Таблица (N, log Z_N, H̄ вперед и назад) и вердикты

        Args:
            kernel: Ядро на торе
            potential: Потенциал V
            n_values: Значения N <= 256
            chain: Параметры MALA
            stream: Поток случайных чисел
            cells: Сетка минимизатора
            damping: Демпфирование итерации
            tol: Порог дефекта
            max_iter: Максимум итераций
            is_samples: Выборки для оценки по значимости
            ti_nodes: Узлы Гаусса-Лежандра
            eps: Регуляризация ядра
            interacting: False: W = 0
            cross_check_n: N для отдельной проверки согласия двух оценок
            slope_tolerance: Допуск наклона около -1

        Returns:
            Строки, минимизатор, наклоны и вердикты
        """
        if not kernel.is_torus:
            raise UnsupportedConfigurationError("entropy rates need the torus mean-field minimizer")
        try:
            minimizer = self.mean_field_solver.solve_minimizer(kernel, potential, cells, damping, tol, max_iter,
                                                               eps=eps, interacting=interacting)
            reference = self.reference_measure(kernel, minimizer)
            rows = [self._row(kernel, potential, reference, n, chain, is_samples, ti_nodes, eps, interacting,
                              stream.child("N", n)) for n in n_values]
            fits = {
                "forward": self._slope(rows, "h_forward", slope_tolerance),
                "backward": self._slope(rows, "h_backward", slope_tolerance),
            }
            checked = [r for r in rows if r.n == cross_check_n] or rows
            verdicts = {
                "log_z_agreement": Verdict.combine(r.cross_validation for r in checked),
                "nonnegativity": Verdict.of(all(
                    r.h_forward >= -NONNEGATIVITY_SIGMAS * r.h_forward_se - 1e-12
                    and r.h_backward >= -NONNEGATIVITY_SIGMAS * r.h_backward_se - 1e-12 for r in rows)),
                "entropy_bound": Verdict.of(all(
                    r.entropy_bound is None or r.h_forward <= r.entropy_bound + NONNEGATIVITY_SIGMAS * r.h_forward_se
                    for r in rows)),
                "slope_forward": self._slope_verdict(fits["forward"]),
                "slope_backward": self._slope_verdict(fits["backward"]),
            }
            return rows, minimizer, fits, verdicts
        except Exception as e:
            logger.error(f"Error estimating entropy rates: {e}")
            raise

    def _row(self, kernel: Kernel, potential: Potential, reference: BaseMeasure, n: int, chain: ChainConfig,
             is_samples: int, ti_nodes: int, eps: float, interacting: bool, stream: RandomStream) -> EntropyRateRow:
        if interacting:
            log_z_is, log_z_is_se = self.log_z_importance(kernel, reference, n, is_samples, eps,
                                                          stream.child("importance"))
        else:
            log_z_is, log_z_is_se = 0.0, 0.0
        log_z_ti, log_z_ti_se = self.log_z_thermodynamic(kernel, potential, reference, n, chain, ti_nodes, eps,
                                                         stream.child("thermodynamic"), interacting)
        combined_se = float(np.hypot(log_z_is_se, log_z_ti_se))
        agree = abs(log_z_is - log_z_ti) <= AGREEMENT_SIGMAS * combined_se + 1e-12
        if not agree:
            logger.warning(f"N={n}: log Z estimators disagree: IS {log_z_is:.5f} +- {log_z_is_se:.5f}, "
                           f"TI {log_z_ti:.5f} +- {log_z_ti_se:.5f}")
        log_z, log_z_se = self._combine(log_z_is, log_z_is_se, log_z_ti, log_z_ti_se)

        run = self.gibbs_sampler.sample_gibbs(kernel, potential, n, chain, stream.child("forward"), eps=eps,
                                              reference=reference, interacting=interacting)
        mean_under_reference = (self.energy_calculator.mean_energy(kernel, eps, reference, n)
                                if interacting else 0.0)
        h_forward = (-run.mean_energy - log_z) / n
        h_backward = (mean_under_reference + log_z) / n
        bound = None
        if interacting:
            terms = self.entropy_bound_terms(kernel, reference, n, log_z, is_samples, eps, stream.child("bound"))
            bound = terms["bound"] / n
        logger.info(f"N={n}: log Z = {log_z:.5f}, H_fwd/N = {h_forward:.3e}, H_bwd/N = {h_backward:.3e}")
        return EntropyRateRow(
            n=n, log_z_is=log_z_is, log_z_is_se=log_z_is_se, log_z_ti=log_z_ti, log_z_ti_se=log_z_ti_se,
            log_z=log_z, h_forward=h_forward, h_forward_se=float(np.hypot(run.mean_energy_se, log_z_se)) / n,
            h_backward=h_backward, h_backward_se=log_z_se / n, entropy_bound=bound,
            cross_validation=Verdict.of(agree), acceptance_rate=run.acceptance_rate, seed=stream.seed)

    @staticmethod
    def _combine(a: float, se_a: float, b: float, se_b: float) -> Tuple[float, float]:
        """Взвешенное по обратной дисперсии среднее"""
        if se_a == 0 and se_b == 0:
            return 0.5 * (a + b), 0.0
        if se_a == 0:
            return a, 0.0
        if se_b == 0:
            return b, 0.0
        wa, wb = 1.0 / se_a ** 2, 1.0 / se_b ** 2
        return (wa * a + wb * b) / (wa + wb), float(np.sqrt(1.0 / (wa + wb)))

    @staticmethod
    def _slope(rows: List[EntropyRateRow], field: str, tolerance: float) -> SlopeFit:
        """Наклон log H̄ по log N по строкам с положительной энтропией"""
        points = [(r.n, getattr(r, field)) for r in rows if getattr(r, field) > 0]
        if len(points) < 3:
            return SlopeFit(t=0.0, slope=float("nan"), intercept=float("nan"), stderr=float("nan"), in_range=False)
        n, h = np.array(points, dtype=float).T
        fit = stats.linregress(np.log(n), np.log(h))
        return SlopeFit(t=0.0, slope=float(fit.slope), intercept=float(fit.intercept), stderr=float(fit.stderr),
                        in_range=bool(abs(fit.slope + 1.0) <= tolerance))

    @staticmethod
    def _slope_verdict(fit: SlopeFit) -> Verdict:
        if not np.isfinite(fit.slope):
            return Verdict.INCONCLUSIVE
        return Verdict.of(fit.in_range)
