"""
Модель ядра взаимодействия W и его регуляризации P_eps W
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .domain import Domain, DomainKind


class KernelFamily(str, Enum):
    """Семейства ядер"""
    TORUS_LOG = "torus-log"  # Фурье-ряд (-Δ)^{-d/2} на торе
    FREE_LOG = "free-log"  # -ln|x - y| в R^d


class SemigroupOrder(str, Enum):
    """Порядок регуляризующей полугруппы"""
    FULL = "full"  # e^{-|2πk|^2 eps}
    HALF = "half"  # e^{-|2πk| eps}, только для d = 1


class Kernel(BaseModel):
    """Ядро взаимодействия"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    domain: Domain = Field(..., description="Область")
    family: KernelFamily = Field(..., description="Семейство ядра")
    fourier_cutoff: Optional[int] = Field(None, ge=0, description="Срез K по |k|_inf (только тор)")
    semigroup_order: Optional[SemigroupOrder] = Field(None, description="Порядок полугруппы P_eps")

    @model_validator(mode="before")
    @classmethod
    def _fill_defaults(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        domain = data.get("domain")
        dimension = domain.dimension if isinstance(domain, Domain) else (domain or {}).get("dimension")
        if dimension is None:
            return data
        if data.get("fourier_cutoff") is None:
            data["fourier_cutoff"] = 64 if dimension <= 2 else 24
        if data.get("semigroup_order") is None:
            data["semigroup_order"] = SemigroupOrder.HALF if dimension == 1 else SemigroupOrder.FULL
        return data

    @model_validator(mode="after")
    def _check_consistency(self) -> "Kernel":
        # P_eps^{1/2} ровно в размерности 1
        expected = SemigroupOrder.HALF if self.domain.dimension == 1 else SemigroupOrder.FULL
        if self.semigroup_order != expected:
            raise ValueError(f"semigroup_order must be '{expected.value}' in dimension {self.domain.dimension}")
        torus_family = self.family == KernelFamily.TORUS_LOG
        if torus_family != (self.domain.kind == DomainKind.TORUS):
            raise ValueError(f"family '{self.family.value}' does not live on domain '{self.domain.kind.value}'")
        return self

    @classmethod
    def torus_log(cls, dimension: int, fourier_cutoff: Optional[int] = None) -> "Kernel":
        """Логарифмическое ядро на торе T^d"""
        return cls(domain=Domain.torus(dimension), family=KernelFamily.TORUS_LOG,
                   fourier_cutoff=fourier_cutoff)

    @classmethod
    def free_log(cls, dimension: int, support_radius: float = 1.0) -> "Kernel":
        """Ядро -ln|x - y| в R^d"""
        return cls(domain=Domain.free_space(dimension, support_radius), family=KernelFamily.FREE_LOG)

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    @property
    def is_torus(self) -> bool:
        return self.family == KernelFamily.TORUS_LOG

    def spec_hash_payload(self) -> dict:
        """Каноническое представление для хеша спецификации ядра"""
        return self.model_dump(mode="json")
