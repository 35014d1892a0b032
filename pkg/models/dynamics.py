"""
Модели состояний динамики: система частиц и решение уравнения Маккина-Власова
"""

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.interpolate import CubicSpline

from .configuration import Configuration


class SdeState(BaseModel):
    """Состояние системы частиц"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    config: Configuration = Field(..., description="Положения частиц")
    time: float = Field(0.0, ge=0, description="Текущее время")
    dt: float = Field(..., gt=0, description="Шаг по времени")
    eps_reg: float = Field(1e-3, ge=0, description="Регуляризация ядра в сносе")
    force_cap: float = Field(..., gt=0, description="Ограничение модуля сноса на частицу")
    cap_activations: int = Field(0, ge=0, description="Накопленное число срабатываний ограничения")

    @classmethod
    def initial(cls, config: Configuration, dt: float, eps_reg: float = 1e-3,
                force_cap: Optional[float] = None) -> "SdeState":
        """Начальное состояние; по умолчанию ограничение 10/√dt"""
        return cls(config=config, dt=dt, eps_reg=eps_reg,
                   force_cap=force_cap if force_cap is not None else 10.0 / np.sqrt(dt))


class PdeState(BaseModel):
    """Плотность на торе в центрах ячеек"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    density: np.ndarray = Field(..., description="Значения плотности, форма cells^d")
    time: float = Field(0.0, ge=0, description="Время")
    dt: float = Field(..., gt=0, description="Шаг по времени")

    @model_validator(mode="after")
    def _check_density(self) -> "PdeState":
        if np.min(self.density) < -1e-8:
            raise ValueError("density is negative beyond -1e-8")
        if abs(self.mass - 1.0) > 1e-10:
            raise ValueError(f"density mass {self.mass} differs from 1")
        return self

    @property
    def cells(self) -> int:
        return int(self.density.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.density.ndim)

    @property
    def mass(self) -> float:
        return float(np.mean(self.density))

    @property
    def spectrum(self) -> np.ndarray:
        """Нормированные коэффициенты Фурье (fftn / cells^d)"""
        return np.fft.fftn(self.density) / self.density.size


class MvTrajectory(BaseModel):
    """Траектория решения уравнения Маккина-Власова"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    times: List[float] = Field(..., description="Моменты сохраненных состояний")
    densities: List[np.ndarray] = Field(..., description="Плотности в эти моменты")
    free_energy: List[float] = Field(default_factory=list, description="E[ρ̄_t] в эти моменты")
    mass_corrections: List[float] = Field(default_factory=list, description="Поправки массы на шагах")
    clipped_negativity: List[float] = Field(default_factory=list, description="Срезанная отрицательная часть")
    rejected_steps: int = Field(0, ge=0, description="Отвергнутые по CFL шаги")

    @property
    def final(self) -> np.ndarray:
        return self.densities[-1]

    def density_at(self, t: float) -> np.ndarray:
        """Плотность в момент t, кубическая интерполяция по времени"""
        times = np.asarray(self.times)
        if t <= times[0]:
            return self.densities[0]
        if t >= times[-1]:
            return self.densities[-1]
        stack = np.stack(self.densities)
        if len(times) < 4:
            return _linear(times, stack, t)
        return CubicSpline(times, stack, axis=0)(t)


def _linear(times: np.ndarray, stack: np.ndarray, t: float) -> np.ndarray:
    j = int(np.searchsorted(times, t)) - 1
    theta = (t - times[j]) / (times[j + 1] - times[j])
    return (1 - theta) * stack[j] + theta * stack[j + 1]


class ModulatedEnergyRow(BaseModel):
    """Строка таблицы модулированной энергии"""

    n: int
    t: float
    mean: float = Field(..., description="E[(1/N) I̊_{W_eps}[η^N_{X_t}]] относительно ρ̄_t")
    standard_error: float
    replicas: int


class SlopeFit(BaseModel):
    """Наклон log-log подгонки"""

    t: float
    slope: float
    intercept: float
    stderr: float
    in_range: bool
