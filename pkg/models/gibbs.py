"""
Модели минимизатора среднего поля и прогонов меры Гиббса
"""

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .verdict import Verdict


class MeanFieldMinimizer(BaseModel):
    """Решение уравнения Эйлера-Лагранжа μ̄ = Z^{-1} e^{-W⋆μ̄ - V}"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    density: np.ndarray = Field(..., description="μ̄ в центрах ячеек")
    z_mu: float = Field(..., gt=0, description="Нормировка Z_μ̄")
    residual: float = Field(..., ge=0, description="sup-норма дефекта неподвижной точки")
    iterations: int = Field(..., ge=0, description="Число итераций")
    residual_history: List[float] = Field(default_factory=list)
    free_energy: float = Field(..., description="E[μ̄] = H[μ̄|dx] + ∫V dμ̄ + ½∬W dμ̄dμ̄")

    @model_validator(mode="after")
    def _check_density(self) -> "MeanFieldMinimizer":
        if np.any(self.density <= 0):
            raise ValueError("minimizer density must be positive")
        if abs(float(np.mean(self.density)) - 1.0) > 1e-10:
            raise ValueError("minimizer density must have mass 1")
        return self

    @property
    def cells(self) -> int:
        return int(self.density.shape[0])


class ChainConfig(BaseModel):
    """Параметры цепи MALA"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    length: int = Field(4000, ge=10, description="Длина цепи после прогрева")
    burn_in: int = Field(1000, ge=0, description="Шаги прогрева с подстройкой шага")
    step_size: float = Field(0.05, gt=0, description="Начальный шаг")
    target_acceptance: float = Field(0.574, gt=0, lt=1, description="Целевая приемлемость")
    thin: int = Field(1, ge=1, description="Прореживание сохраненных состояний")
    chains: int = Field(4, ge=1, description="Независимые цепи на узел")


class GibbsRun(BaseModel):
    """Результат выборки из меры Гиббса M_{N,β}"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int = Field(..., ge=1)
    beta: float = Field(1.0, ge=0, description="Температура семейства M_{N,β}")
    chain_length: int
    burn_in: int
    step_size: float = Field(..., gt=0, description="Замороженный шаг после прогрева")
    acceptance_rate: float = Field(..., ge=0, le=1)
    mean_energy: float = Field(..., description="E_{M_N}[I̊] (или H_N без μ̄)")
    mean_energy_se: float = Field(..., ge=0)
    flagged: bool = Field(False, description="Приемлемость вне (0.2, 0.9)")
    energies: Optional[np.ndarray] = Field(None, description="Энергии сохраненных состояний")
    states: Optional[np.ndarray] = Field(None, description="Сохраненные состояния, форма (S, N, d)")


class EntropyRateRow(BaseModel):
    """Строка таблицы энтропийных скоростей"""

    n: int
    log_z_is: float
    log_z_is_se: float
    log_z_ti: float
    log_z_ti_se: float
    log_z: float = Field(..., description="Согласованное значение (взвешенное среднее)")
    h_forward: float = Field(..., description="H̄[M_N|μ̄^⊗N]")
    h_forward_se: float
    h_backward: float = Field(..., description="H̄[μ̄^⊗N|M_N] = log Z_N / N")
    h_backward_se: float
    entropy_bound: Optional[float] = Field(None, description="Правая часть цепочки Коши-Шварца")
    cross_validation: Verdict = Verdict.PASS
    acceptance_rate: float = 1.0
    seed: Optional[int] = None
