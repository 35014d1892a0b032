"""
Модели комбинаторики неравенства корреляций: мультииндексы, профили кратностей,
центрированное ядро
"""

from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .kernel import Kernel
from .measure import BaseMeasure
from .verdict import Verdict

Pair = Tuple[int, int]


class MultiIndex(BaseModel):
    """p-мультииндекс I_p: A -> N ∪ {0}, A = {(i, j): i ≠ j}"""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=2, description="Число частиц")
    p: int = Field(..., ge=0, description="Порядок момента")
    entries: Dict[Pair, int] = Field(..., description="Ненулевые значения I_p((i, j))")

    @model_validator(mode="after")
    def _check_entries(self) -> "MultiIndex":
        if sum(self.entries.values()) != self.p:
            raise ValueError("multiindex entries must sum to p")
        for (i, j), value in self.entries.items():
            if i == j or not (0 <= i < self.n and 0 <= j < self.n) or value <= 0:
                raise ValueError(f"invalid multiindex entry {(i, j)}: {value}")
        return self

    def support(self) -> List[Pair]:
        """Пары с I_p > 0 в лексикографическом порядке"""
        return sorted(self.entries)


class MultiplicityProfile(BaseModel):
    """Кратности m_{i,I_p}, активное множество B_{I_p} и act(I_p)"""

    model_config = ConfigDict(frozen=True)

    m: Tuple[int, ...] = Field(..., description="Кратности по частицам")
    active: FrozenSet[int] = Field(..., description="B_{I_p} = {i: m_i ≠ 0}")
    act: int = Field(..., ge=0, description="|B_{I_p}|")
    p: int = Field(..., ge=0)
    restricted: bool = Field(..., description="Принадлежность E_p: ни одна кратность не равна 1")

    @model_validator(mode="after")
    def _check_profile(self) -> "MultiplicityProfile":
        if sum(self.m) != 2 * self.p:
            raise ValueError("multiplicities must sum to 2p")
        if self.act > min(2 * self.p, len(self.m)):
            raise ValueError("act exceeds min(2p, N)")
        if self.restricted:
            if 1 in self.m:
                raise ValueError("restricted profile has a multiplicity equal to 1")
            if max(self.m, default=0) > 2 * self.p - 2 * (self.act - 1):
                raise ValueError("restricted profile violates max m_i <= 2p - 2(act - 1)")
        return self


class ActivePairDecomposition(BaseModel):
    """Разбиение носителя I_p на множества C_{k,I_p}"""

    active_order: Tuple[int, ...] = Field(..., description="i_1 < ... < i_ℓ")
    blocks: List[List[Pair]] = Field(..., description="C_{k,I_p}, k = 1..ℓ-1")
    gammas: List[int] = Field(..., description="γ_k = Σ_{C_k} I_p")
    is_partition: bool = Field(..., description="Блоки попарно не пересекаются и покрывают носитель")


class CenteredKernel(BaseModel):
    """G_eps = центрирование (W - W_eps) относительно ρ̄ по обоим аргументам

    На торе хранится спектральное представление G(x, y) = Σ_k d_k a_k(x) conj(a_k(y)),
    для атомарной меры дополнительно таблица значений на атомах.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kernel: Optional[Kernel] = Field(None, description="Базовое ядро (None для явной таблицы)")
    eps: float = Field(0.0, ge=0, description="Регуляризация")
    measure: BaseMeasure = Field(..., description="Мера центрирования")
    table: Optional[np.ndarray] = Field(None, description="G(y_a, y_b) на атомах")

    @classmethod
    def from_table(cls, measure: BaseMeasure, table) -> "CenteredKernel":
        """Явная таблица на атомах, центрированная по ρ̄ по строкам и столбцам"""
        table = np.asarray(table, dtype=float)
        table = 0.5 * (table + table.T)
        w = measure.weights
        row = table @ w
        total = w @ table @ w
        centered = table - row[:, None] - row[None, :] + total
        return cls(measure=measure, table=centered)


class MomentReport(BaseModel):
    """Отчет о проверке неравенства корреляций"""

    p: int
    gamma: float
    n_values: List[int]
    lhs: List[float] = Field(..., description="Оценки E|(1/N) Σ_{i≠j} G|^p")
    lhs_se: List[float]
    rhs: List[float] = Field(..., description="C_p (N^{-(p-1-⌊γp⌋)} S_p + S_floor)")
    fitted_constant: float
    expected_exponent: float
    fitted_exponent: Optional[float] = None
    floor: Optional[float] = None
    closed_form: List[Optional[float]] = Field(default_factory=list)
    verdict: Verdict = Verdict.INCONCLUSIVE
    notes: Optional[str] = None
