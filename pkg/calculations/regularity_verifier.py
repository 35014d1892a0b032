"""
Численная проверка предположений о регулярности ядра:
логарифмическая оценка диагонали, оценка типа Бесова, квантованная супергармоничность,
сходимость усеченного ряда и H-устойчивость
"""

from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd
from scipy import signal, stats

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import (
    Kernel, BaseMeasure, MeasureKind, SemigroupOrder, GapEvaluation, RegularityReport,
    RandomStream, Verdict, ConfigurationError, DomainError
)
from .kernel_calculator import KernelCalculator, fold_to_grid

logger = logging.getLogger(__name__)

RATIO_SPREAD = 3.0
SUPERHARM_TOLERANCE = 1e-6
EXPONENT_WINDOW = (0.5, 1.5)
ATOMIC_PROBE_RESOLUTION = 32
# Предельные разрешения сеток в d = 3
TORUS_3D_RESOLUTION = 64
FREE_3D_RESOLUTION = 16


def _check_epsilons(epsilons: Sequence[float]) -> np.ndarray:
    eps = np.asarray(list(epsilons), dtype=float)
    if eps.size == 0:
        raise ConfigurationError("epsilon sweep is empty")
    if np.any(eps <= 0) or np.any(eps >= 0.5) or np.any(np.diff(eps) >= 0):
        raise ConfigurationError("epsilons must be strictly decreasing in (0, 1/2)")
    return eps


def _loglog_fit(eps: np.ndarray, values: np.ndarray) -> Tuple[float, float, np.ndarray]:
    """Наклон и свободный член log(values) по log(eps), остатки"""
    x, y = np.log(eps), np.log(values)
    if len(x) < 2:
        return float("nan"), float(y[0]) if len(y) else float("nan"), np.zeros_like(y)
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.intercept), y - (fit.intercept + fit.slope * x)


class RegularityVerifier:
    """Sweep по eps и вердикты проверок ядра"""

    def __init__(self, kernel_calculator: Optional[KernelCalculator] = None):
        self.kernel_calculator = kernel_calculator or KernelCalculator()

    # Логарифмическая оценка диагонали

    def verify_log_bound(self, kernel: Kernel, epsilons: Sequence[float]) -> RegularityReport:
        """
        W_eps(x, x) / (|ln eps| + 1) по sweep eps

        Args:
            kernel: Ядро
            epsilons: Строго убывающие eps из (0, 1/2)

        Returns:
            Отчет с диагональю, отношениями и константой C0
        """
        eps = _check_epsilons(epsilons)
        try:
            logger.info(f"Log-bound sweep over {len(eps)} epsilons, {kernel.family.value} d={kernel.dimension}")
            diagonal = np.array([self.kernel_calculator.diagonal_value(kernel, e) for e in eps])
            ratios = diagonal / (np.abs(np.log(eps)) + 1.0)
            tails = [self.kernel_calculator.tail_bound(kernel, e) if kernel.is_torus else 0.0 for e in eps]

            finer = ratios[eps <= np.median(eps)]
            positive = finer[finer > 0]
            if len(positive) != len(finer):
                verdict = Verdict.FAIL
                spread = float("inf")
            else:
                spread = float(positive.max() / positive.min())
                verdict = Verdict.of(spread <= RATIO_SPREAD)
            monotone = bool(np.all(np.diff(diagonal) >= -1e-12 * np.abs(diagonal[1:])))
            verdict = Verdict.combine([verdict, Verdict.of(monotone)])
            c0 = float(ratios.max())
            logger.info(f"Log-bound: C0 = {c0:.5f}, finer-half spread {spread:.3f}, monotone {monotone}")
            return RegularityReport(
                check="log_bound", epsilons=eps.tolist(), diagonal_values=diagonal.tolist(),
                diagonal_ratios=ratios.tolist(), tail_bounds=tails,
                fitted_exponents={"C0": c0, "spread": spread},
                verdict=verdict, notes=None if monotone else "diagonal is not monotone in eps")
        except Exception as e:
            logger.error(f"Error in log-bound sweep: {e}")
            raise

    # Оценка типа Бесова

    def verify_besov(self, kernel: Kernel, measure: BaseMeasure, p: int, epsilons: Sequence[float],
                     resolution: int = 256, mode: GapEvaluation = GapEvaluation.AUTO) -> RegularityReport:
        """
        sup_x ‖(P_eps - id)W(x,·)‖^p_{L^p(ρ̄)} и подгонка показателя κ̂

        Args:
            kernel: Ядро
            measure: Базовая мера
            p: Показатель, 1 <= p <= 16
            epsilons: Строго убывающие eps
            resolution: Разрешение сетки по y
            mode: Способ вычисления W - W_eps

        Returns:
            Отчет с нормами, κ̂ и остатками
        """
        if not 1 <= p <= 16:
            raise ConfigurationError(f"besov exponent must lie in [1, 16], got {p}")
        eps = _check_epsilons(epsilons)
        if resolution < 8:
            raise ConfigurationError("besov resolution must be at least 8")
        if kernel.dimension == 3:
            cap = TORUS_3D_RESOLUTION if kernel.is_torus else FREE_3D_RESOLUTION
            if resolution > cap:
                logger.info(f"Besov grid in d=3 reduced from {resolution} to {cap}")
                resolution = cap
        try:
            logger.info(f"Besov sweep: p={p}, {len(eps)} epsilons, measure {measure.kind.value}, grid {resolution}")
            norms = np.array([self._besov_norm(kernel, measure, p, e, resolution, mode) for e in eps])
            expected = kernel.dimension / 2.0 if kernel.semigroup_order == SemigroupOrder.FULL else float(kernel.dimension)
            positive = norms > 0
            notes = None
            if positive.sum() >= 2:
                kappa, intercept, residuals = _loglog_fit(eps[positive], norms[positive])
                low, high = EXPONENT_WINDOW[0] * expected, EXPONENT_WINDOW[1] * expected
                verdict = Verdict.of(low <= kappa <= high)
            else:
                kappa, intercept, residuals = float("nan"), float("nan"), np.zeros(0)
                verdict = Verdict.INCONCLUSIVE
                notes = "fewer than two positive norms"
            logger.info(f"Besov: fitted kappa = {kappa:.4f}, expected {expected}")
            return RegularityReport(
                check="besov", epsilons=eps.tolist(), besov_norms=norms.tolist(),
                fitted_exponents={"kappa": kappa, "log_constant": intercept, "expected_kappa": expected},
                residuals=residuals.tolist(), verdict=verdict, notes=notes)
        except Exception as e:
            logger.error(f"Error in Besov sweep: {e}")
            raise

    def _besov_norm(self, kernel: Kernel, measure: BaseMeasure, p: int, eps: float,
                    resolution: int, mode: GapEvaluation) -> float:
        d = kernel.dimension
        domain = kernel.domain
        if measure.kind == MeasureKind.ATOMIC:
            probes = (np.arange(ATOMIC_PROBE_RESOLUTION) + 0.25) / ATOMIC_PROBE_RESOLUTION
            probes = domain.box_origin + probes * domain.box_length
            axes = np.meshgrid(*([probes] * d), indexing="ij")
            x = np.stack([a.ravel() for a in axes], axis=-1)
            delta = domain.displacement(x[:, None, :], measure.atoms[None, :, :]).reshape(-1, d)
            gap = self.kernel_calculator.regularization_gap(kernel, eps, delta, mode).reshape(len(x), -1)
            values = np.abs(gap) ** p @ measure.weights
            if not np.all(np.isfinite(values)):
                raise DomainError("an atom coincides with a probe point")
            return float(values.max())

        if domain.is_torus:
            gap = self._torus_gap_grid(kernel, eps, resolution, mode)
            powered = np.abs(gap) ** p
            if measure.kind == MeasureKind.UNIFORM:
                return float(powered.mean())
            # x в углах ячеек, y в центрах: x_i - y_l попадает в узел i - l - 1 сдвинутой сетки
            shifted = np.roll(powered, 1, axis=tuple(range(d)))
            density = measure.density_on(resolution)
            field = np.real(np.fft.ifftn(np.fft.fftn(shifted) * np.fft.fftn(density))) / resolution ** d
            return float(field.max())

        # R^d: линейная свертка с профилем на сетке смещений [-2R, 2R)^d
        h = domain.box_length / resolution
        offsets = (np.arange(-resolution, resolution) + 0.5) * h
        axes = np.meshgrid(*([offsets] * d), indexing="ij")
        delta = np.stack([a.ravel() for a in axes], axis=-1)
        gap = self.kernel_calculator.regularization_gap(kernel, eps, delta, mode).reshape((2 * resolution,) * d)
        density = measure.density_on(resolution)
        field = signal.fftconvolve(np.abs(gap) ** p, density, mode="full") * h ** d
        window = tuple(slice(resolution - 1, 2 * resolution) for _ in range(d))
        return float(field[window].max())

    def _torus_gap_grid(self, kernel: Kernel, eps: float, resolution: int, mode: GapEvaluation) -> np.ndarray:
        """(W - W_eps) в узлах (j + 1/2)/G тора"""
        d = kernel.dimension
        if mode == GapEvaluation.SERIES or (mode == GapEvaluation.AUTO and d == 3):
            table = self.kernel_calculator.table(kernel)
            weights = table.coefficients * (1.0 - table.multipliers(kernel.semigroup_order, eps))
            return np.real(fold_to_grid(weights, table.frequencies, resolution, offset=0.5))
        grid = (np.arange(resolution) + 0.5) / resolution
        axes = np.meshgrid(*([grid] * d), indexing="ij")
        delta = np.stack([a.ravel() for a in axes], axis=-1)
        return self.kernel_calculator.regularization_gap(kernel, eps, delta, mode).reshape((resolution,) * d)

    # Супергармоничность

    def verify_superharmonicity(self, kernel: Kernel, epsilons: Sequence[float], grid_resolution: int,
                                mode: GapEvaluation = GapEvaluation.AUTO) -> RegularityReport:
        """
        min по сетке смещений (W - P_eps W) и оценка снизу -K eps^α

        Args:
            kernel: Ядро
            epsilons: Строго убывающие eps
            grid_resolution: Число узлов сетки по оси, не меньше 8
            mode: Способ вычисления W - W_eps

        Returns:
            Отчет с минимумами и подгонкой (K̂, α̂)
        """
        if grid_resolution < 8:
            raise ConfigurationError(f"grid_resolution must be at least 8, got {grid_resolution}")
        eps = _check_epsilons(epsilons)
        d = kernel.dimension
        if d == 3 and not kernel.is_torus:
            grid_resolution = min(grid_resolution, FREE_3D_RESOLUTION)
        try:
            logger.info(f"Superharmonicity sweep: {len(eps)} epsilons, grid {grid_resolution}^{d}")
            minima = np.array([self._gap_minimum(kernel, e, grid_resolution, mode) for e in eps])
            fitted = {}
            residuals: List[float] = []
            notes = None
            if d <= 2:
                # W - W_eps на торе имеет нулевое среднее, поэтому нижняя граница -eps, а не 0
                floor = eps if kernel.is_torus else np.zeros_like(eps)
                verdict = Verdict.of(bool(np.all(minima >= -floor - SUPERHARM_TOLERANCE)))
                fitted = {"K": 1.0 if kernel.is_torus else 0.0, "alpha": 1.0}
            else:
                negative = minima < -SUPERHARM_TOLERANCE
                if negative.sum() == 0:
                    verdict = Verdict.PASS
                    fitted = {"K": 0.0, "alpha": float("nan")}
                    notes = "gap nonnegative on the grid"
                elif negative.sum() < 2:
                    verdict = Verdict.INCONCLUSIVE
                    notes = "fewer than two negative minima to fit"
                else:
                    alpha, intercept, res = _loglog_fit(eps[negative], -minima[negative])
                    scaled = -minima[negative] / eps[negative] ** alpha
                    spread = float(scaled.max() / scaled.min())
                    fitted = {"K": float(scaled.max()), "alpha": alpha, "spread": spread}
                    residuals = res.tolist()
                    verdict = Verdict.of(spread <= RATIO_SPREAD)
            logger.info(f"Superharmonicity minima: {np.array2string(minima, precision=3)}; verdict {verdict.value}")
            return RegularityReport(
                check="superharmonicity", epsilons=eps.tolist(), superharm_minima=minima.tolist(),
                fitted_exponents=fitted, residuals=residuals, verdict=verdict, notes=notes)
        except Exception as e:
            logger.error(f"Error in superharmonicity sweep: {e}")
            raise

    def _gap_minimum(self, kernel: Kernel, eps: float, resolution: int, mode: GapEvaluation) -> float:
        if kernel.is_torus:
            return float(self._torus_gap_grid(kernel, eps, resolution, mode).min())
        d = kernel.dimension
        reach = 2.0 * kernel.domain.support_radius
        grid = (np.arange(-resolution, resolution) + 0.5) * reach / resolution
        axes = np.meshgrid(*([grid] * d), indexing="ij")
        delta = np.stack([a.ravel() for a in axes], axis=-1)
        return float(self.kernel_calculator.regularization_gap(kernel, eps, delta, mode).min())

    # Усечение ряда

    def verify_truncation(self, cutoffs: Sequence[int], eps: float = 0.0,
                          resolution: int = 64) -> Tuple[pd.DataFrame, Verdict]:
        """
        Ошибка усеченного ряда тора d = 1 против замкнутой формы

        Args:
            cutoffs: Возрастающие K
            eps: Регуляризация (0 для голого ядра)
            resolution: Число точек (j + 1/2)/G

        Returns:
            Таблица (K, max ошибки, оценка хвоста) и вердикт
        """
        cutoffs = sorted(int(k) for k in cutoffs)
        if not cutoffs or cutoffs[0] < 1:
            raise ConfigurationError("truncation cutoffs must be positive")
        x = ((np.arange(resolution) + 0.5) / resolution)[:, None]
        rows = []
        for cutoff in cutoffs:
            kernel = Kernel.torus_log(1, cutoff)
            series = self.kernel_calculator.profile(kernel, eps, x)
            exact = self.kernel_calculator.analytic_profile(kernel, eps, x)
            error = np.abs(series - exact)
            if eps > 0:
                bound = np.full_like(error, self.kernel_calculator.tail_bound(kernel, eps))
            else:
                bound = np.array([self.kernel_calculator.tail_bound(kernel, 0.0, xi) for xi in x[:, 0]])
            rows.append({
                "cutoff": cutoff, "max_error": float(error.max()),
                "max_bound": float(bound.max()), "within_bound": bool(np.all(error <= bound + 1e-12)),
            })
        frame = pd.DataFrame(rows)
        monotone = bool(np.all(np.diff(frame["max_error"].to_numpy()) <= 0))
        verdict = Verdict.of(bool(frame["within_bound"].all()) and monotone)
        logger.info(f"Truncation check over K={cutoffs}: monotone {monotone}, verdict {verdict.value}")
        return frame, verdict

    # H-устойчивость

    def verify_h_stability(self, kernel: Kernel, eps: float, trials: int,
                           stream: RandomStream, max_atoms: int = 8) -> Tuple[pd.DataFrame, Verdict]:
        """
        ∬ W_eps dη dη >= 0 для случайных η с нулевой суммой: квадратура против спектра

        Args:
            kernel: Ядро на торе
            eps: Регуляризация
            trials: Число случайных η
            stream: Поток случайных чисел
            max_atoms: Максимальное число атомов

        Returns:
            Таблица испытаний и вердикт
        """
        rng = stream.generator()
        diagonal = self.kernel_calculator.diagonal_value(kernel, eps)
        rows = []
        for trial in range(trials):
            count = int(rng.integers(2, max_atoms + 1))
            atoms = rng.random((count, kernel.dimension))
            charges = rng.standard_normal(count)
            charges -= charges.mean()
            quadrature, spectral = self.kernel_calculator.h_stability_pair(kernel, eps, atoms, charges)
            scale = max(1.0, abs(diagonal) * float(charges @ charges))
            rows.append({
                "trial": trial, "atoms": count, "quadrature": quadrature, "spectral": spectral,
                "agree": abs(quadrature - spectral) <= 1e-9 * scale, "nonnegative": spectral >= 0,
            })
        frame = pd.DataFrame(rows)
        verdict = Verdict.of(bool(frame["agree"].all() and frame["nonnegative"].all()))
        logger.info(f"H-stability over {trials} trials: verdict {verdict.value}")
        return frame, verdict

    def semigroup_defect(self, kernel: Kernel, eps: float, delta: float) -> float:
        """max |m(eps) m(delta) - m(eps + delta)| по таблице"""
        table = self.kernel_calculator.table(kernel)
        order = kernel.semigroup_order
        product = table.multipliers(order, eps) * table.multipliers(order, delta)
        return float(np.max(np.abs(product - table.multipliers(order, eps + delta))))
