"""
Модель оценки статсуммы Z_{N,β}
"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .verdict import Verdict


class PartitionEstimate(BaseModel):
    """Оценка Монте-Карло Z_{N,β} = E[exp(-β I̊)]"""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="Число частиц N")
    beta: float = Field(..., ge=0, description="Обратная температура β")
    eps: float = Field(..., ge=0, description="Регуляризация ядра")
    samples: int = Field(..., ge=1, description="Число принятых выборок")
    discarded: int = Field(0, ge=0, description="Отброшенные нечисловые выборки")
    mean: float = Field(..., ge=0, description="Оценка Z")
    log_mean: float = Field(..., description="log Z через logsumexp")
    ci_halfwidth: float = Field(..., ge=0, description="Полуширина 95% бутстреп-интервала")
    ci_low: float = Field(..., description="Нижняя граница интервала")
    ci_high: float = Field(..., description="Верхняя граница интервала")
    standard_error: float = Field(..., ge=0, description="Стандартная ошибка среднего весов")
    log_standard_error: float = Field(..., ge=0, description="Дельта-метод: SE(log Z)")
    ess: float = Field(..., gt=0, description="Эффективный размер выборки")
    mean_energy: float = Field(..., description="Выборочное среднее I̊")
    seed: Optional[int] = Field(None, description="Корневой seed")

    @model_validator(mode="after")
    def _check_ess(self) -> "PartitionEstimate":
        if self.ess > self.samples * (1 + 1e-9):
            raise ValueError("ess must not exceed the number of samples")
        return self

    def to_row(self) -> dict:
        """Строка CSV (N, beta, eps, samples, mean, ci, ess, seed)"""
        return {"N": self.n, "beta": self.beta, "eps": self.eps, "samples": self.samples,
                "mean": self.mean, "log_mean": self.log_mean, "ci": self.ci_halfwidth,
                "se": self.standard_error, "ess": self.ess, "seed": self.seed}


class PartitionSweep(BaseModel):
    """Результат sweep по N"""

    estimates: List[PartitionEstimate] = Field(..., description="Оценки по возрастанию N")
    running_max: List[float] = Field(..., description="Текущий максимум оценок")
    jensen_bounds: List[float] = Field(default_factory=list, description="exp(-β E[I̊]) для каждого N")
    trend_verdict: Verdict = Field(Verdict.INCONCLUSIVE, description="Отсутствие роста по N")
    lower_verdict: Verdict = Field(Verdict.INCONCLUSIVE, description="Z ≥ 1 - CI")
    jensen_verdict: Verdict = Field(Verdict.INCONCLUSIVE, description="Z ≥ exp(-β E[I̊]) - CI")
    ess_verdict: Verdict = Field(Verdict.INCONCLUSIVE, description="ESS не ниже порога")


class EnumeratedPartition(BaseModel):
    """Точное значение Z для атомарной меры перебором m^N конфигураций"""

    n: int
    beta: float
    configurations: int
    mean: float
    log_mean: float
    mean_energy: float


class LayerCakeRow(BaseModel):
    """Сравнение эмпирического хвоста энергии с оценкой Чебышева"""

    level: float = Field(..., description="Порог s для события -β I̊ ≥ s")
    tail_probability: float
    chebyshev_bound: float


class LayerCakeDiagnostic(BaseModel):
    """Проверка формулы слоев для Z и хвостов Чебышева"""

    n: int
    beta: float
    moment_order: int
    direct_mean: float = Field(..., description="Среднее весов")
    layer_cake_mean: float = Field(..., description="1 + ∫_1^∞ P[w > t] dt - ∫_0^1 P[w ≤ t] dt")
    rows: List[LayerCakeRow]
