"""
Модели конфигурации эксперимента и записи о прогоне
"""

from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .domain import Domain, DomainKind
from .gibbs import ChainConfig
from .kernel import Kernel, KernelFamily, SemigroupOrder
from .measure import BaseMeasure
from .potential import Potential, PotentialKind
from .verdict import Verdict


def _dyadic(start: int, stop: int) -> List[float]:
    return [2.0 ** -k for k in range(start, stop + 1)]


class ExperimentKind(str, Enum):
    """Виды экспериментов"""
    KERNEL_VERIFY = "kernel-verify"
    ZSWEEP = "zsweep"
    MOMENTS_VERIFY = "moments-verify"
    SDE_RUN = "sde-run"
    MV_SOLVE = "mv-solve"
    MFL_SWEEP = "mfl-sweep"
    GIBBS = "gibbs"


class GapEvaluation(str, Enum):
    """Способ вычисления W - W_eps"""
    AUTO = "auto"  # Замкнутые формы, где они есть
    SERIES = "series"  # Усеченный ряд Фурье
    CLOSED_FORM = "closed-form"


class StrictModel(BaseModel):
    """Базовая модель конфигурации: неизвестные ключи запрещены"""

    model_config = ConfigDict(extra="forbid", frozen=True)


class KernelSpec(StrictModel):
    """Спецификация ядра"""

    family: KernelFamily = KernelFamily.TORUS_LOG
    dimension: int = Field(2, ge=1, le=3)
    fourier_cutoff: Optional[int] = Field(None, ge=1)
    semigroup_order: Optional[SemigroupOrder] = None
    support_radius: float = Field(1.0, gt=0)

    def domain(self) -> Domain:
        kind = DomainKind.TORUS if self.family == KernelFamily.TORUS_LOG else DomainKind.FREE_SPACE
        return Domain(kind=kind, dimension=self.dimension, support_radius=self.support_radius)

    def to_kernel(self) -> Kernel:
        return Kernel(domain=self.domain(), family=self.family, fourier_cutoff=self.fourier_cutoff,
                      semigroup_order=self.semigroup_order)


class MeasureSpec(StrictModel):
    """Спецификация базовой меры из фиксированного словаря"""

    kind: str = Field("uniform", description="uniform | single-mode | two-bump | atomic")
    cells: int = Field(64, ge=2)
    amplitude: float = Field(0.5, gt=-1, lt=1)
    atoms: Optional[List[List[float]]] = None
    weights: Optional[List[float]] = None

    @field_validator("kind")
    @classmethod
    def _known_kind(cls, value: str) -> str:
        if value not in ("uniform", "single-mode", "two-bump", "atomic"):
            raise ValueError(f"unknown measure kind '{value}'")
        return value

    @model_validator(mode="after")
    def _atoms_present(self) -> "MeasureSpec":
        if self.kind == "atomic" and not self.atoms:
            raise ValueError("atomic measure requires a non-empty 'atoms' list")
        return self

    def to_measure(self, domain: Domain) -> BaseMeasure:
        if self.kind == "uniform":
            return BaseMeasure.uniform(domain)
        if self.kind == "single-mode":
            return BaseMeasure.single_mode(domain, self.amplitude, self.cells)
        if self.kind == "two-bump":
            return BaseMeasure.two_bump(domain, self.cells)
        return BaseMeasure.atomic(domain, self.atoms, self.weights)


class PotentialSpec(StrictModel):
    """Спецификация внешнего потенциала"""

    kind: PotentialKind = PotentialKind.ZERO
    amplitude: float = 0.0

    def to_potential(self, domain: Domain) -> Potential:
        return Potential(domain=domain, kind=self.kind, amplitude=self.amplitude)


class KernelVerifyParams(StrictModel):
    """Параметры проверки ядра"""

    log_bound_epsilons: List[float] = Field(default_factory=lambda: _dyadic(4, 12))
    besov_epsilons: List[float] = Field(default_factory=lambda: _dyadic(4, 8))
    besov_p: int = Field(4, ge=1, le=16)
    besov_resolution: int = Field(256, ge=8)
    superharm_epsilons: List[float] = Field(default_factory=lambda: _dyadic(4, 10))
    superharm_resolution: int = Field(64, ge=8)
    truncation_cutoffs: List[int] = Field(default_factory=lambda: [8, 32, 128])
    h_stability_trials: int = Field(32, ge=1)
    gap_evaluation: GapEvaluation = GapEvaluation.AUTO


class ProbeParams(StrictModel):
    """Параметры отжига для нижней оценки энергии"""

    n_values: List[int] = Field(default_factory=lambda: [4, 16, 64, 256])
    search_budget: int = Field(4, ge=0)
    sweeps: int = Field(200, ge=1)
    eps: float = Field(0.0, ge=0)


class ZsweepParams(StrictModel):
    """Параметры sweep статсуммы"""

    n_values: List[int] = Field(default_factory=lambda: [2 ** k for k in range(1, 9)])
    betas: List[float] = Field(default_factory=lambda: [1.0, 2.0])
    diagnostic_betas: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0])
    eps: float = Field(0.0, ge=0)
    samples: int = Field(100_000, ge=1000)
    chunk_size: int = Field(2000, ge=100)
    ess_threshold: float = Field(50.0, gt=0)
    probe: Optional[ProbeParams] = None

    @field_validator("n_values")
    @classmethod
    def _increasing(cls, value: List[int]) -> List[int]:
        if not value or any(b <= a for a, b in zip(value, value[1:])) or value[0] < 1:
            raise ValueError("n_values must be a non-empty increasing list of positive integers")
        return value


class MomentsParams(StrictModel):
    """Параметры проверки неравенства корреляций"""

    enumeration_cases: List[Tuple[int, int]] = Field(
        default_factory=lambda: [(2, 1), (2, 2), (3, 2), (3, 3), (4, 2)])
    oracle_cases: List[Tuple[int, int]] = Field(default_factory=lambda: [(3, 2), (4, 3), (6, 4)])
    oracle_samples: int = Field(100_000, ge=1000)
    eps: float = Field(0.05, gt=0)
    p: int = Field(2, ge=1, le=4)
    gamma: float = Field(0.5, ge=0.5, lt=1.0)
    scaling_n_values: List[int] = Field(default_factory=lambda: [4, 8, 16, 32, 64])
    scaling_samples: int = Field(20_000, ge=100)
    chunk_size: int = Field(2000, ge=100)


class SdeRunParams(StrictModel):
    """Параметры прогона системы частиц"""

    n: int = Field(256, ge=1)
    dt: float = Field(1e-3, gt=0)
    dt_max: float = Field(1e-2, gt=0)
    steps: int = Field(1000, ge=1)
    eps_reg: float = Field(1e-3, ge=0)
    force_cap: Optional[float] = Field(None, gt=0)
    snapshot_every: int = Field(100, ge=1)

    @model_validator(mode="after")
    def _dt_bound(self) -> "SdeRunParams":
        if self.dt > self.dt_max:
            raise ValueError("dt exceeds dt_max")
        return self


class MvSolveParams(StrictModel):
    """Параметры псевдоспектрального решателя"""

    cells: int = Field(128, ge=8)
    dt: float = Field(1e-4, gt=0)
    t_end: float = Field(0.5, gt=0, le=2.0)
    save_every: int = Field(10, ge=1)
    eps: float = Field(0.0, ge=0)


class MflSweepParams(StrictModel):
    """Параметры sweep модулированной энергии"""

    n_values: List[int] = Field(default_factory=lambda: [8, 16, 32, 64, 128])
    t_grid: List[float] = Field(default_factory=lambda: [0.0, 0.1, 0.5])
    replicas: int = Field(64, ge=2)
    dt: float = Field(1e-3, gt=0)
    eps_reg: float = Field(1e-3, ge=0)
    pde_cells: int = Field(128, ge=8)
    pde_dt: float = Field(1e-4, gt=0)
    slope_range: Tuple[float, float] = (-1.3, -0.7)


class GibbsParams(StrictModel):
    """Параметры эксперимента с мерой Гиббса"""

    n_values: List[int] = Field(default_factory=lambda: [4, 8, 16, 32, 64, 128])
    chain: ChainConfig = Field(default_factory=ChainConfig)
    cells: int = Field(128, ge=8)
    damping: float = Field(0.5, gt=0, le=1)
    tol: float = Field(1e-10, gt=0)
    max_iter: int = Field(500, ge=1)
    is_samples: int = Field(20_000, ge=1000)
    ti_nodes: int = Field(8, ge=2)
    cross_check_n: int = Field(16, ge=1)
    slope_tolerance: float = Field(0.3, gt=0)
    eps: float = Field(0.0, ge=0)

    @field_validator("n_values")
    @classmethod
    def _bounded(cls, value: List[int]) -> List[int]:
        if not value or max(value) > 256:
            raise ValueError("n_values must be non-empty and at most 256")
        return value


_PARAM_BLOCKS = {
    ExperimentKind.KERNEL_VERIFY: ("kernel_verify", KernelVerifyParams),
    ExperimentKind.ZSWEEP: ("zsweep", ZsweepParams),
    ExperimentKind.MOMENTS_VERIFY: ("moments_verify", MomentsParams),
    ExperimentKind.SDE_RUN: ("sde_run", SdeRunParams),
    ExperimentKind.MV_SOLVE: ("mv_solve", MvSolveParams),
    ExperimentKind.MFL_SWEEP: ("mfl_sweep", MflSweepParams),
    ExperimentKind.GIBBS: ("gibbs", GibbsParams),
}


class ExperimentConfig(StrictModel):
    """Декларативная конфигурация эксперимента"""

    kind: ExperimentKind = Field(..., description="Вид эксперимента")
    seed: int = Field(0, ge=0, lt=2 ** 64, description="Корневой seed")
    workers: int = Field(1, ge=1, description="Размер пула исполнителей")
    output_dir: str = Field("out", description="Каталог результатов")
    interacting: bool = Field(True, description="False: W = 0")
    kernel: KernelSpec = Field(default_factory=KernelSpec)
    measure: MeasureSpec = Field(default_factory=MeasureSpec)
    potential: PotentialSpec = Field(default_factory=PotentialSpec)
    kernel_verify: Optional[KernelVerifyParams] = None
    zsweep: Optional[ZsweepParams] = None
    moments_verify: Optional[MomentsParams] = None
    sde_run: Optional[SdeRunParams] = None
    mv_solve: Optional[MvSolveParams] = None
    mfl_sweep: Optional[MflSweepParams] = None
    gibbs: Optional[GibbsParams] = None

    @model_validator(mode="after")
    def _fill_kind_block(self) -> "ExperimentConfig":
        name, model = _PARAM_BLOCKS[self.kind]
        if getattr(self, name) is None:
            object.__setattr__(self, name, model())
        return self

    def params(self) -> StrictModel:
        """Блок параметров текущего вида эксперимента"""
        return getattr(self, _PARAM_BLOCKS[self.kind][0])

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Копия с переопределенными полями верхнего уровня"""
        data = self.model_dump(mode="json")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return ExperimentConfig.model_validate(data)


class ExperimentRecord(BaseModel):
    """Запись о прогоне эксперимента"""

    kind: ExperimentKind
    config_hash: str = Field(..., description="sha256 канонического JSON конфигурации")
    kernel_hash: str = Field(..., description="sha256 спецификации ядра")
    artifact_version: str = Field(..., description="Версия в стиле git describe")
    seed: int
    workers: int
    wall_time: float = Field(..., ge=0, description="Время выполнения, с")
    verdicts: Dict[str, Verdict] = Field(default_factory=dict)
    data_files: List[str] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)
    created_at: datetime = Field(default_factory=datetime.now)

    def overall(self) -> Verdict:
        """Сводный вердикт прогона"""
        return Verdict.combine(self.verdicts.values())
