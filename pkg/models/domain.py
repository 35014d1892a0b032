"""
Модель области: тор T^d или свободное пространство R^d
"""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class DomainKind(str, Enum):
    """Типы областей"""
    TORUS = "torus"  # Периодический тор с периодом 1
    FREE_SPACE = "free-space"  # Свободное пространство


class Domain(BaseModel):
    """Область, в которой живут частицы"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: DomainKind = Field(..., description="Тип области")
    dimension: int = Field(..., ge=1, le=3, description="Размерность d")
    period: float = Field(1.0, description="Период тора (всегда 1)")
    support_radius: float = Field(1.0, gt=0, description="Полуширина ограничивающего куба базовых мер в R^d")

    @model_validator(mode="after")
    def _check_period(self) -> "Domain":
        if self.kind == DomainKind.TORUS and self.period != 1.0:
            raise ValueError("torus period must be exactly 1")
        return self

    @classmethod
    def torus(cls, dimension: int) -> "Domain":
        """Тор T^d"""
        return cls(kind=DomainKind.TORUS, dimension=dimension)

    @classmethod
    def free_space(cls, dimension: int, support_radius: float = 1.0) -> "Domain":
        """Свободное пространство R^d"""
        return cls(kind=DomainKind.FREE_SPACE, dimension=dimension, support_radius=support_radius)

    @property
    def is_torus(self) -> bool:
        """Проверка, является ли область тором"""
        return self.kind == DomainKind.TORUS

    @property
    def box_origin(self) -> float:
        """Левая граница куба, несущего базовые меры"""
        return 0.0 if self.is_torus else -self.support_radius

    @property
    def box_length(self) -> float:
        """Длина ребра куба, несущего базовые меры"""
        return 1.0 if self.is_torus else 2.0 * self.support_radius

    def wrap(self, points: np.ndarray) -> np.ndarray:
        """Приведение точек в область (по модулю 1 на торе)"""
        points = np.asarray(points, dtype=float)
        if self.is_torus:
            wrapped = np.mod(points, 1.0)
            # np.mod(-1e-18, 1.0) == 1.0
            return np.where(wrapped >= 1.0, 0.0, wrapped)
        return points

    def displacement(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Смещение x - y (на торе приведенное в [-1/2, 1/2))"""
        delta = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        if self.is_torus:
            delta = delta - np.floor(delta + 0.5)
        return delta
