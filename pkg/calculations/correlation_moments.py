"""
Комбинаторика неравенства корреляций: перечисление мультииндексов, профили кратностей,
точные оракулы моментов, центрированное ядро G_eps и проверка масштабирования по N
"""

from collections import Counter
from itertools import combinations_with_replacement
from math import comb, factorial, prod
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd
from scipy import optimize

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import (
    Kernel, BaseMeasure, MeasureKind, RandomStream, Verdict, GapEvaluation,
    MultiIndex, MultiplicityProfile, ActivePairDecomposition, CenteredKernel, MomentReport,
    ConfigurationError, UnsupportedConfigurationError, InvariantViolationError
)
from .kernel_calculator import KernelCalculator, fold_to_grid, structure_factor, synthesize
from .convolution import fourier_coefficients
from .measure_sampler import MeasureSampler

logger = logging.getLogger(__name__)

MAX_PAIRS = 30
MAX_ORDER = 4
MAX_ENUMERATION = 1_000_000
NORM_RESOLUTION = {1: 256, 2: 32, 3: 12}
BATCH_ELEMENTS = 2_000_000


def _pairs(n: int) -> List[Tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def _check_budget(n: int, p: int):
    if n < 2:
        raise ConfigurationError(f"multiindices need n >= 2, got {n}")
    if n * (n - 1) > MAX_PAIRS or p > MAX_ORDER or p < 0:
        raise ConfigurationError(f"enumeration budget exceeded: n(n-1) = {n * (n - 1)}, p = {p}")


def _multinomial(values: Iterable[int]) -> int:
    values = list(values)
    return factorial(sum(values)) // prod(factorial(v) for v in values)


class CorrelationMoments:
    """Мультииндексы I_p, оракулы E|(1/N) Σ_{i≠j} G(X_i, X_j)|^p и масштабирование по N"""

    def __init__(self, kernel_calculator: Optional[KernelCalculator] = None,
                 sampler: Optional[MeasureSampler] = None, chunk_size: int = 2000,
                 map_fn: Optional[Callable[[Callable, Iterable], Iterable]] = None):
        self.kernel_calculator = kernel_calculator or KernelCalculator()
        self.sampler = sampler or MeasureSampler()
        self.chunk_size = chunk_size
        self.map_fn = map_fn or map

    # Перечисление и классификация

    def enumerate_multiindices(self, n: int, p: int) -> Iterator[MultiIndex]:
        """
        Все отображения A -> N ∪ {0} с суммой p, каждое ровно один раз

        Args:
            n: Число частиц, n(n-1) <= 30
            p: Порядок, p <= 4

        Returns:
            Ленивый поток мультииндексов
        """
        _check_budget(n, p)
        return self._stream(n, p)

    @staticmethod
    def _stream(n: int, p: int) -> Iterator[MultiIndex]:
        for combo in combinations_with_replacement(_pairs(n), p):
            yield MultiIndex(n=n, p=p, entries=dict(Counter(combo)))

    @staticmethod
    def classify(index: MultiIndex) -> MultiplicityProfile:
        """Кратности m_i, активное множество и принадлежность E_p"""
        m = [0] * index.n
        for (i, j), value in index.entries.items():
            m[i] += value
            m[j] += value
        active = frozenset(i for i, value in enumerate(m) if value)
        return MultiplicityProfile(m=tuple(m), active=active, act=len(active), p=index.p,
                                   restricted=1 not in m)

    def count_restricted(self, n: int, p: int, ell: int) -> int:
        """
        |E_{p,ℓ}| перебором с проверкой оценки binom(n, ℓ)(ℓ² - ℓ)^p

        Returns:
            Число ограниченных мультииндексов с act = ℓ
        """
        count = 0
        for index in self.enumerate_multiindices(n, p):
            profile = self.classify(index)
            if profile.restricted and profile.act == ell:
                count += 1
        bound = comb(n, ell) * (ell * ell - ell) ** p
        if count > bound:
            raise InvariantViolationError(f"|E_(p={p}, l={ell})| = {count} exceeds {bound} for n={n}")
        return count

    def restricted_counts(self, n: int, p: int) -> pd.DataFrame:
        """Таблица (n, p, ℓ, |E_{p,ℓ}|, оценка) и полное |E_p|"""
        counts = Counter()
        total = 0
        for index in self.enumerate_multiindices(n, p):
            profile = self.classify(index)
            total += 1
            if profile.restricted:
                counts[profile.act] += 1
        rows = [{"n": n, "p": p, "ell": ell, "count": counts.get(ell, 0),
                 "bound": comb(n, ell) * (ell * ell - ell) ** p, "multiindices": total}
                for ell in range(1, min(2 * p, n) + 1)]
        for row in rows:
            if row["count"] > row["bound"]:
                raise InvariantViolationError(f"restricted count {row} exceeds its bound")
        return pd.DataFrame(rows)

    @staticmethod
    def decompose_active_pairs(index: MultiIndex) -> ActivePairDecomposition:
        """
        Разбиение носителя I_p на C_k: пары, содержащие i_k, без уже отнесенных к C_1..C_{k-1}

        Args:
            index: Мультииндекс

        Returns:
            Блоки C_k, суммы γ_k и признак разбиения
        """
        support = index.support()
        active = sorted({i for pair in support for i in pair})
        blocks: List[List[Tuple[int, int]]] = []
        assigned = set()
        for k in range(max(len(active) - 1, 0)):
            anchor = active[k]
            block = [pair for pair in support if anchor in pair and pair not in assigned]
            assigned.update(block)
            blocks.append(block)
        flat = [pair for block in blocks for pair in block]
        is_partition = len(flat) == len(set(flat)) and set(flat) == set(support)
        gammas = [sum(index.entries[pair] for pair in block) for block in blocks]
        return ActivePairDecomposition(active_order=tuple(active), blocks=blocks, gammas=gammas,
                                       is_partition=is_partition)

    # Центрированное ядро

    def centered_kernel(self, kernel: Kernel, eps: float, measure: BaseMeasure) -> CenteredKernel:
        """
        G_eps для ядра и меры: таблица на атомах или спектральное представление на торе

        Args:
            kernel: Ядро
            eps: Регуляризация, eps > 0
            measure: Мера центрирования

        Returns:
            Центрированное ядро
        """
        if eps <= 0:
            raise ConfigurationError("centered kernel requires eps > 0")
        if measure.kind == MeasureKind.ATOMIC:
            if not kernel.is_torus:
                raise UnsupportedConfigurationError("free-space gap is unbounded on the diagonal")
            delta = kernel.domain.displacement(measure.atoms[:, None, :], measure.atoms[None, :, :])
            gap = self.kernel_calculator.regularization_gap(
                kernel, eps, delta.reshape(-1, kernel.dimension), GapEvaluation.SERIES)
            table = CenteredKernel.from_table(measure, gap.reshape(len(measure.atoms), -1)).table
            return CenteredKernel(kernel=kernel, eps=eps, measure=measure, table=table)
        if not kernel.is_torus:
            raise UnsupportedConfigurationError("continuous centered kernels are spectral and need the torus")
        return CenteredKernel(kernel=kernel, eps=eps, measure=measure)

    def _spectral(self, g: CenteredKernel):
        """Веса d_k = ĉ_k (1 - m_k), коэффициенты ρ̂_k и частоты"""
        table = self.kernel_calculator.table(g.kernel)
        d = table.coefficients * (1.0 - table.multipliers(g.kernel.semigroup_order, g.eps))
        rho_hat = fourier_coefficients(g.measure, table.frequencies)
        return d, rho_hat, table.frequencies

    def evaluate(self, g: CenteredKernel, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """G(x, y) = g(x - y) - h(x) - h(y) + c в парах точек"""
        x, y = np.atleast_2d(x), np.atleast_2d(y)
        if g.table is not None:
            raise ConfigurationError("tabulated kernels are evaluated by atom index")
        d, rho_hat, freqs = self._spectral(g)
        delta = g.kernel.domain.displacement(x, y)
        pair = np.real(synthesize(d, freqs, delta))
        h_x = np.real(synthesize(d * rho_hat, freqs, x))
        h_y = np.real(synthesize(d * rho_hat, freqs, y))
        constant = float(np.sum(d * np.abs(rho_hat) ** 2))
        return pair - h_x - h_y + constant

    def _grid_matrix(self, g: CenteredKernel):
        """Матрица G на сетке R^d x R^d и квадратурные веса ρ̄"""
        dim = g.kernel.dimension
        resolution = NORM_RESOLUTION[dim]
        d, rho_hat, freqs = self._spectral(g)
        pair = np.real(fold_to_grid(d, freqs, resolution)).ravel()
        h = np.real(fold_to_grid(d * rho_hat, freqs, resolution)).ravel()
        constant = float(np.sum(d * np.abs(rho_hat) ** 2))
        axes = np.indices((resolution,) * dim).reshape(dim, -1)
        diff = [np.subtract.outer(a, a) % resolution for a in axes]
        flat = np.ravel_multi_index(tuple(diff), (resolution,) * dim)
        matrix = pair[flat] - h[:, None] - h[None, :] + constant
        if g.measure.kind == MeasureKind.UNIFORM:
            weights = np.full(resolution ** dim, 1.0 / resolution ** dim)
        else:
            grid = np.stack([a / resolution for a in axes], axis=-1)
            index = np.clip(np.floor(grid / g.measure.cell_width).astype(int), 0, g.measure.cells - 1)
            weights = g.measure.density[tuple(index.T)]
            weights = weights / weights.sum()
        return matrix, weights

    def lp_sup_norm(self, g: CenteredKernel, q: float) -> float:
        """sup_x ∫ |G(x, y)|^q dρ̄(y) (q-я степень нормы)"""
        if g.table is not None:
            return float(np.max(np.abs(g.table) ** q @ g.measure.weights))
        matrix, weights = self._grid_matrix(g)
        return float(np.max(np.abs(matrix) ** q @ weights))

    def second_moment_closed_form(self, g: CenteredKernel, n: int) -> float:
        """E|(1/N) Σ_{i≠j} G|^2 = 2(N-1)/N · E[G(X, Y)^2]"""
        if g.table is not None:
            w = g.measure.weights
            mean_square = float(w @ g.table ** 2 @ w)
        elif g.measure.kind == MeasureKind.UNIFORM:
            d, _, _ = self._spectral(g)
            mean_square = float(np.sum(d ** 2))
        else:
            matrix, weights = self._grid_matrix(g)
            mean_square = float(weights @ matrix ** 2 @ weights)
        return 2.0 * (n - 1) / n * mean_square

    @staticmethod
    def rank_one(measure: BaseMeasure, values: Sequence[float]) -> CenteredKernel:
        """G(a, b) = g(a) g(b) для центрированной g на атомах"""
        g = np.asarray(values, dtype=float)
        g = g - g @ measure.weights
        return CenteredKernel(measure=measure, table=np.outer(g, g))

    # Оракулы

    @staticmethod
    def _statistic_from_counts(table: np.ndarray, counts: np.ndarray) -> np.ndarray:
        """(1/N) Σ_{i≠j} G(X_i, X_j) через числа заполнения атомов"""
        counts = np.atleast_2d(counts).astype(float)
        n = counts.sum(axis=1)
        quadratic = np.einsum("bi,ij,bj->b", counts, table, counts)
        return (quadratic - counts @ np.diag(table)) / n

    def moment_oracle(self, g: CenteredKernel, n: int, p: int) -> Tuple[float, float]:
        """
        Точные E|T|^p и E[T^p] перебором m^n конфигураций атомарной меры

        Args:
            g: Центрированное ядро с таблицей на атомах
            n: Число частиц
            p: Порядок

        Returns:
            (E|T|^p, E[T^p])
        """
        if g.table is None:
            raise ConfigurationError("moment oracle requires an atomic table")
        weights = g.measure.weights
        m = len(weights)
        if m ** n > MAX_ENUMERATION:
            raise ConfigurationError(f"oracle over {m ** n} configurations exceeds {MAX_ENUMERATION}")
        indices = np.indices((m,) * n).reshape(n, -1).T
        counts = np.stack([(indices == a).sum(axis=1) for a in range(m)], axis=1)
        probabilities = np.prod(weights[indices], axis=1)
        statistic = self._statistic_from_counts(g.table, counts)
        return float(probabilities @ np.abs(statistic) ** p), float(probabilities @ statistic ** p)

    @staticmethod
    def term_expectation(g: CenteredKernel, index: MultiIndex) -> float:
        """E[Π_{(i,j)} G(X_i, X_j)^{I_p(i,j)}] по активным переменным"""
        weights = g.measure.weights
        m = len(weights)
        active = sorted({i for pair in index.entries for i in pair})
        position = {particle: k for k, particle in enumerate(active)}
        assignments = np.indices((m,) * len(active)).reshape(len(active), -1).T
        probability = np.prod(weights[assignments], axis=1)
        value = np.ones(len(assignments))
        for (i, j), power in index.entries.items():
            value *= g.table[assignments[:, position[i]], assignments[:, position[j]]] ** power
        return float(probability @ value)

    def expanded_moment(self, g: CenteredKernel, n: int, p: int, restricted_only: bool = True) -> float:
        """
        E[T^p] = N^{-p} Σ_{I_p} multinomial(I_p) E[Π G^{I_p}] по мультииндексам

        Args:
            g: Центрированное ядро с таблицей
            n: Число частиц
            p: Порядок
            restricted_only: Суммировать только по E_p

        Returns:
            Значение момента со знаком
        """
        if g.table is None:
            raise ConfigurationError("expanded moment requires an atomic table")
        total = 0.0
        for index in self.enumerate_multiindices(n, p):
            if restricted_only and not self.classify(index).restricted:
                continue
            total += _multinomial(index.entries.values()) * self.term_expectation(g, index)
        return total / n ** p

    def nonrestricted_contributions(self, g: CenteredKernel, n: int, p: int) -> List[float]:
        """Вклады мультииндексов вне E_p (для центрированного G все нулевые)"""
        return [_multinomial(index.entries.values()) * self.term_expectation(g, index)
                for index in self.enumerate_multiindices(n, p) if not self.classify(index).restricted]

    # Монте-Карло

    def sample_statistic(self, g: CenteredKernel, n: int, samples: int, stream: RandomStream) -> np.ndarray:
        """Выборка T = (1/N) Σ_{i≠j} G(X_i, X_j), блоки по потокам stream.child(i)"""
        starts = list(range(0, samples, self.chunk_size))

        def run_chunk(index: int) -> np.ndarray:
            count = min(self.chunk_size, samples - starts[index])
            rng = stream.child(index).generator()
            if g.table is not None:
                atoms = self.sampler.sample_indices(g.measure, (count, n), rng)
                m = len(g.measure.weights)
                counts = np.stack([(atoms == a).sum(axis=1) for a in range(m)], axis=1)
                return self._statistic_from_counts(g.table, counts)
            points = self.sampler.sample_points(g.measure, count * n, rng).reshape(count, n, -1)
            return self._spectral_statistic(g, points)

        return np.concatenate(list(self.map_fn(run_chunk, range(len(starts)))))

    def _spectral_statistic(self, g: CenteredKernel, points: np.ndarray) -> np.ndarray:
        """T = (1/N) Σ_k d_k (|S_k - Nρ̂_k|^2 - N(1 + |ρ̂_k|^2) + 2 Re(ρ̂_k conj S_k))"""
        d, rho_hat, freqs = self._spectral(g)
        b, n, _ = points.shape
        block = max(1, BATCH_ELEMENTS // (n * len(freqs) + d.size))
        out = np.empty(b)
        for start in range(0, b, block):
            s = structure_factor(freqs, points[start:start + block])
            axes = tuple(range(1, s.ndim))
            value = (np.abs(s - n * rho_hat) ** 2 - n * (1.0 + np.abs(rho_hat) ** 2)
                     + 2.0 * np.real(rho_hat * np.conj(s)))
            out[start:start + block] = np.sum(d * value, axis=axes) / n
        return out

    def moment_monte_carlo(self, g: CenteredKernel, n: int, p: int, samples: int,
                           stream: RandomStream, signed: bool = False) -> Tuple[float, float]:
        """Среднее |T|^p (или T^p) и его стандартная ошибка"""
        statistic = self.sample_statistic(g, n, samples, stream)
        values = statistic ** p if signed else np.abs(statistic) ** p
        return float(values.mean()), float(values.std(ddof=1) / np.sqrt(len(values)))

    # Масштабирование по N

    def verify_corineq_scaling(self, g: CenteredKernel, p: int, gamma: float, n_values: Sequence[int],
                               samples: int, stream: RandomStream) -> MomentReport:
        """
        LHS = E|(1/N) Σ_{i≠j} G|^p против C_p (N^{-(p-1-⌊γp⌋)} S_p^p + S_q^p)

        Args:
            g: Центрированное ядро
            p: Порядок, 1..4 (для p = 1 используется среднее со знаком)
            gamma: γ из [1/2, 1)
            n_values: Возрастающие N
            samples: Выборки на N
            stream: Поток случайных чисел

        Returns:
            Отчет с подогнанными C_p и показателем
        """
        if not 1 <= p <= MAX_ORDER:
            raise ConfigurationError(f"p must lie in 1..{MAX_ORDER}, got {p}")
        if not 0.5 <= gamma < 1.0:
            raise ConfigurationError(f"gamma must lie in [1/2, 1), got {gamma}")
        n_values = sorted(int(n) for n in n_values)
        if not n_values or n_values[0] < 2:
            raise ConfigurationError("scaling n_values must be at least 2")
        try:
            exponent = float(p - 1 - int(np.floor(gamma * p)))
            q = max(2 * (p - int(np.ceil(gamma * p))), 1)
            sup_p = self.lp_sup_norm(g, p)
            floor = self.lp_sup_norm(g, q) ** (p / q)
            logger.info(f"Correlation scaling p={p}, gamma={gamma}: exponent {exponent}, floor {floor:.4g}")

            lhs, lhs_se = [], []
            for n in n_values:
                mean, se = self.moment_monte_carlo(g, n, p, samples, stream.child("N", n), signed=(p == 1))
                lhs.append(mean)
                lhs_se.append(se)
            lhs_arr, se_arr = np.array(lhs), np.array(lhs_se)
            n_arr = np.array(n_values, dtype=float)
            bracket = n_arr ** (-exponent) * sup_p + floor
            constant = 2.0 * abs(lhs_arr[0]) / bracket[0] if bracket[0] > 0 else 0.0
            rhs = constant * bracket

            closed = [self.second_moment_closed_form(g, n) if p == 2 else None for n in n_values]
            notes = None
            if np.all(np.abs(lhs_arr) <= 3 * se_arr):
                verdict = Verdict.INCONCLUSIVE
                notes = "all estimates at the noise floor"
                fitted = None
            else:
                checks = [Verdict.of(bool(np.all(lhs_arr <= rhs + 3 * se_arr)))]
                if p == 2:
                    closed_arr = np.array(closed)
                    checks.append(Verdict.of(bool(np.all(np.abs(lhs_arr - closed_arr) <= 4 * se_arr + 1e-12))))
                verdict = Verdict.combine(checks)
                fitted = self._fit_exponent(n_arr, lhs_arr, se_arr, exponent)
            logger.info(f"Correlation scaling verdict {verdict.value}, fitted exponent {fitted}")
            return MomentReport(p=p, gamma=gamma, n_values=n_values, lhs=lhs, lhs_se=lhs_se, rhs=rhs.tolist(),
                                fitted_constant=constant, expected_exponent=exponent, fitted_exponent=fitted,
                                floor=floor, closed_form=closed, verdict=verdict, notes=notes)
        except Exception as e:
            logger.error(f"Error in correlation scaling check: {e}")
            raise

    @staticmethod
    def _fit_exponent(n: np.ndarray, lhs: np.ndarray, se: np.ndarray, guess: float) -> Optional[float]:
        """Подгонка LHS ≈ a N^{-κ} + f"""
        if len(n) < 3:
            return None

        def model(x, a, kappa, f):
            return a * x ** (-kappa) + f

        sigma = se if np.all(se > 0) else None
        try:
            params, _ = optimize.curve_fit(
                model, n, lhs, p0=(abs(lhs[0]), guess, abs(lhs[-1]) / 2), sigma=sigma,
                bounds=([0.0, -2.0, 0.0], [np.inf, 6.0, np.inf]), maxfev=10_000)
        except (RuntimeError, ValueError) as e:
            logger.warning(f"Exponent fit failed: {e}")
            return None
        return float(params[1])
