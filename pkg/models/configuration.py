"""
Модель конфигурации частиц и разложения энергии взаимодействия
"""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .domain import Domain


class FluctuationNormalization(str, Enum):
    """Нормировка поля флуктуаций"""
    CENTERED = "centered"  # η = N^{-1/2}(Σδ - Nρ̄)
    LITERAL = "literal"  # η = N^{-1/2}(Σδ - ρ̄)


class Configuration(BaseModel):
    """Упорядоченный набор N точек в области"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    domain: Domain = Field(..., description="Область")
    points: np.ndarray = Field(..., description="Координаты частиц, форма (N, d)")

    @model_validator(mode="after")
    def _check_points(self) -> "Configuration":
        pts = self.points
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] != self.domain.dimension:
            raise ValueError("points must have shape (N, d) with N >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        if self.domain.is_torus and (np.any(pts < 0) or np.any(pts >= 1)):
            raise ValueError("torus points must be reduced mod 1")
        return self

    @classmethod
    def from_points(cls, domain: Domain, points) -> "Configuration":
        """Конфигурация с приведением точек в область"""
        pts = np.asarray(points, dtype=float).reshape(-1, domain.dimension)
        return cls(domain=domain, points=domain.wrap(pts))

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    def permuted(self, order) -> "Configuration":
        """Конфигурация с переставленными метками"""
        return Configuration(domain=self.domain, points=self.points[np.asarray(order)])


class EnergyBreakdown(BaseModel):
    """Трехчленное разложение I̊_{W_eps}[η]"""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="Число частиц")
    eps: float = Field(..., ge=0, description="Параметр регуляризации")
    pair_term: float = Field(..., description="(1/2N) Σ_{i≠j} W_eps(x_i, x_j)")
    cross_term: float = Field(..., description="Σ_i (W_eps ⋆ ρ̄)(x_i)")
    mean_term: float = Field(..., description="(N/2) ∬ W_eps dρ̄ dρ̄")
    total: float = Field(..., description="pair - cross + mean")

    @model_validator(mode="after")
    def _check_total(self) -> "EnergyBreakdown":
        expected = self.pair_term - self.cross_term + self.mean_term
        scale = max(1.0, abs(self.pair_term), abs(self.cross_term), abs(self.mean_term))
        if abs(self.total - expected) > 1e-9 * scale:
            raise ValueError("total must equal pair - cross + mean")
        return self

    def to_row(self) -> dict:
        """Строка для CSV"""
        return {"N": self.n, "eps": self.eps, "pair": self.pair_term, "cross": self.cross_term,
                "mean": self.mean_term, "total": self.total}
