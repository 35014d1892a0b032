"""
Модель базовой меры: равномерная, сеточная плотность или атомарная мера
"""

from enum import Enum
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .domain import Domain

MASS_TOLERANCE = 1e-12


class MeasureKind(str, Enum):
    """Представления базовой меры"""
    UNIFORM = "uniform"
    GRID = "grid"  # Кусочно-постоянная плотность на тензорной сетке
    ATOMIC = "atomic"  # Конечный набор атомов с весами


class BaseMeasure(BaseModel):
    """Базовая мера ρ̄"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    domain: Domain = Field(..., description="Область")
    kind: MeasureKind = Field(..., description="Представление меры")
    density: Optional[np.ndarray] = Field(None, description="Значения плотности по ячейкам, форма cells^d")
    atoms: Optional[np.ndarray] = Field(None, description="Координаты атомов, форма (m, d)")
    weights: Optional[np.ndarray] = Field(None, description="Веса атомов")

    @model_validator(mode="after")
    def _check_mass(self) -> "BaseMeasure":
        d = self.domain.dimension
        if self.kind == MeasureKind.GRID:
            if self.density is None or self.density.ndim != d or len(set(self.density.shape)) != 1:
                raise ValueError("grid density must be a cubic array of dimension d")
            if np.any(self.density < 0):
                raise ValueError("grid density must be nonnegative")
            mass = float(self.density.sum()) * self.cell_volume
            if abs(mass - 1.0) > MASS_TOLERANCE:
                raise ValueError(f"grid density has mass {mass}, expected 1")
        elif self.kind == MeasureKind.ATOMIC:
            if self.atoms is None or self.weights is None:
                raise ValueError("atomic measure requires atoms and weights")
            if self.atoms.ndim != 2 or self.atoms.shape[1] != d or len(self.weights) != len(self.atoms):
                raise ValueError("atoms must have shape (m, d) matching weights")
            if np.any(self.weights < 0):
                raise ValueError("atomic weights must be nonnegative")
            if abs(float(self.weights.sum()) - 1.0) > MASS_TOLERANCE:
                raise ValueError("atomic weights must sum to 1")
        return self

    # Конструкторы

    @classmethod
    def uniform(cls, domain: Domain) -> "BaseMeasure":
        """Равномерная мера на торе (или на ограничивающем кубе в R^d)"""
        return cls(domain=domain, kind=MeasureKind.UNIFORM)

    @classmethod
    def from_grid(cls, domain: Domain, density: np.ndarray) -> "BaseMeasure":
        """Сеточная плотность, нормированная на единичную массу"""
        density = np.asarray(density, dtype=float)
        cells = density.shape[0]
        cell_volume = (domain.box_length / cells) ** domain.dimension
        mass = density.sum() * cell_volume
        if mass <= 0:
            raise ValueError("grid density has no mass")
        return cls(domain=domain, kind=MeasureKind.GRID, density=density / mass)

    @classmethod
    def single_mode(cls, domain: Domain, amplitude: float, cells: int) -> "BaseMeasure":
        """Плотность 1 + a·cos(2πx_1) в значениях центров ячеек"""
        if not abs(amplitude) < 1:
            raise ValueError("single-mode amplitude must satisfy |a| < 1")
        centers = (np.arange(cells) + 0.5) / cells
        profile = 1.0 + amplitude * np.cos(2 * np.pi * centers)
        shape = (cells,) + (1,) * (domain.dimension - 1)
        density = np.broadcast_to(profile.reshape(shape), (cells,) * domain.dimension).copy()
        return cls.from_grid(domain, density)

    @classmethod
    def two_bump(cls, domain: Domain, cells: int, centers: Sequence[float] = (0.25, 0.75),
                 width: float = 0.08, mix: float = 0.5, floor: float = 0.1) -> "BaseMeasure":
        """Смесь двух периодизованных гауссовых горбов над постоянным фоном"""
        grid = domain.box_origin + (np.arange(cells) + 0.5) * domain.box_length / cells
        axes = np.meshgrid(*([grid] * domain.dimension), indexing="ij")
        density = np.full((cells,) * domain.dimension, floor)
        for center, weight in zip(centers, (mix, 1.0 - mix)):
            sq = np.zeros_like(density)
            for axis in axes:
                delta = domain.displacement(axis, center) if domain.is_torus else axis - center
                sq = sq + delta ** 2
            density = density + weight * np.exp(-sq / (2 * width ** 2))
        return cls.from_grid(domain, density)

    @classmethod
    def atomic(cls, domain: Domain, points: Sequence, weights: Optional[Sequence[float]] = None) -> "BaseMeasure":
        """Атомарная мера (по умолчанию с равными весами)"""
        atoms = domain.wrap(np.atleast_2d(np.asarray(points, dtype=float)))
        if atoms.shape[1] != domain.dimension:
            atoms = atoms.reshape(-1, domain.dimension)
        w = np.full(len(atoms), 1.0 / len(atoms)) if weights is None else np.asarray(weights, dtype=float)
        return cls(domain=domain, kind=MeasureKind.ATOMIC, atoms=atoms, weights=w / w.sum())

    # Свойства

    @property
    def cells(self) -> int:
        return 0 if self.density is None else int(self.density.shape[0])

    @property
    def cell_width(self) -> float:
        return self.domain.box_length / self.cells

    @property
    def cell_volume(self) -> float:
        return self.cell_width ** self.domain.dimension

    @property
    def linf_density(self) -> float:
        """‖dρ̄/dx‖_inf"""
        if self.kind == MeasureKind.UNIFORM:
            return 1.0 / self.domain.box_length ** self.domain.dimension
        if self.kind == MeasureKind.GRID:
            return float(self.density.max())
        return float("inf")

    @property
    def is_atomic(self) -> bool:
        return self.kind == MeasureKind.ATOMIC

    def cell_centers(self, resolution: Optional[int] = None) -> np.ndarray:
        """Центры ячеек, форма (cells^d, d), порядок C"""
        cells = resolution or self.cells
        h = self.domain.box_length / cells
        grid = self.domain.box_origin + (np.arange(cells) + 0.5) * h
        axes = np.meshgrid(*([grid] * self.domain.dimension), indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=-1)

    def density_on(self, resolution: int) -> np.ndarray:
        """Плотность в центрах ячеек сетки resolution^d"""
        d = self.domain.dimension
        if self.kind == MeasureKind.UNIFORM:
            return np.full((resolution,) * d, self.linf_density)
        if self.kind == MeasureKind.GRID:
            centers = self.cell_centers(resolution)
            index = np.floor((centers - self.domain.box_origin) / self.cell_width).astype(int)
            index = np.clip(index, 0, self.cells - 1)
            return self.density[tuple(index.T)].reshape((resolution,) * d)
        raise ValueError("atomic measures have no density")
