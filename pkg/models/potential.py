"""
Модель внешнего потенциала V
"""

from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .domain import Domain


class PotentialKind(str, Enum):
    """Виды потенциала"""
    ZERO = "zero"
    SINGLE_MODE = "single-mode"  # a·cos(2πx_1)
    QUADRATIC = "quadratic"  # (a/2)|x|^2
    DOUBLE_WELL = "double-well"  # a·(x_1^2 - 1)^2
    GRID = "grid"  # Значения на периодической сетке


class Potential(BaseModel):
    """Внешний потенциал V со значениями и градиентом"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    domain: Domain = Field(..., description="Область")
    kind: PotentialKind = Field(PotentialKind.ZERO, description="Вид потенциала")
    amplitude: float = Field(0.0, description="Амплитуда a")
    values: Optional[np.ndarray] = Field(None, description="Значения на сетке для kind = grid")

    @model_validator(mode="after")
    def _check_kind(self) -> "Potential":
        if self.kind in (PotentialKind.SINGLE_MODE, PotentialKind.GRID) and not self.domain.is_torus:
            raise ValueError(f"potential '{self.kind.value}' requires the torus")
        if self.kind == PotentialKind.GRID and (self.values is None or self.values.ndim != self.domain.dimension):
            raise ValueError("grid potential requires values of dimension d")
        return self

    @classmethod
    def zero(cls, domain: Domain) -> "Potential":
        return cls(domain=domain)

    @property
    def is_zero(self) -> bool:
        return self.kind == PotentialKind.ZERO or (self.kind != PotentialKind.GRID and self.amplitude == 0.0)

    def value(self, points: np.ndarray) -> np.ndarray:
        """V в точках, форма (..., d) -> (...)"""
        x = np.asarray(points, dtype=float)
        if self.kind == PotentialKind.ZERO:
            return np.zeros(x.shape[:-1])
        if self.kind == PotentialKind.SINGLE_MODE:
            return self.amplitude * np.cos(2 * np.pi * x[..., 0])
        if self.kind == PotentialKind.QUADRATIC:
            return 0.5 * self.amplitude * np.sum(x ** 2, axis=-1)
        if self.kind == PotentialKind.DOUBLE_WELL:
            return self.amplitude * (x[..., 0] ** 2 - 1.0) ** 2 + 0.5 * np.sum(x[..., 1:] ** 2, axis=-1)
        return self._grid_lookup(self.values, x)

    def gradient(self, points: np.ndarray) -> np.ndarray:
        """∇V в точках, форма (..., d)"""
        x = np.asarray(points, dtype=float)
        grad = np.zeros_like(x)
        if self.kind == PotentialKind.SINGLE_MODE:
            grad[..., 0] = -2 * np.pi * self.amplitude * np.sin(2 * np.pi * x[..., 0])
        elif self.kind == PotentialKind.QUADRATIC:
            grad = self.amplitude * x
        elif self.kind == PotentialKind.DOUBLE_WELL:
            grad[..., 0] = 4 * self.amplitude * x[..., 0] * (x[..., 0] ** 2 - 1.0)
            grad[..., 1:] = x[..., 1:]
        elif self.kind == PotentialKind.GRID:
            cells = self.values.shape[0]
            k = np.fft.fftfreq(cells, d=1.0 / cells)
            spectrum = np.fft.fftn(self.values)
            for axis in range(self.domain.dimension):
                shape = [1] * self.domain.dimension
                shape[axis] = cells
                derivative = np.real(np.fft.ifftn(2j * np.pi * k.reshape(shape) * spectrum))
                grad[..., axis] = self._grid_lookup(derivative, x)
        return grad

    def on_grid(self, cells: int) -> np.ndarray:
        """V в центрах ячеек тора, форма cells^d"""
        grid = (np.arange(cells) + 0.5) / cells
        axes = np.meshgrid(*([grid] * self.domain.dimension), indexing="ij")
        return self.value(np.stack(axes, axis=-1))

    @staticmethod
    def _grid_lookup(values: np.ndarray, x: np.ndarray) -> np.ndarray:
        cells = values.shape[0]
        index = np.floor(np.mod(x, 1.0) * cells).astype(int) % cells
        return values[tuple(np.moveaxis(index, -1, 0))]
