"""
Общие фикстуры тестов
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Добавляем корневую директорию в путь
sys.path.insert(0, str(Path(__file__).parent.parent))

from models import Kernel, BaseMeasure, Domain, Potential, RandomStream
from calculations import KernelCalculator, EnergyCalculator, MeasureSampler


@pytest.fixture
def torus1() -> Kernel:
    return Kernel.torus_log(1, 32)


@pytest.fixture
def torus2() -> Kernel:
    return Kernel.torus_log(2, 12)


@pytest.fixture
def free2() -> Kernel:
    return Kernel.free_log(2)


@pytest.fixture
def uniform1() -> BaseMeasure:
    return BaseMeasure.uniform(Domain.torus(1))


@pytest.fixture
def uniform2() -> BaseMeasure:
    return BaseMeasure.uniform(Domain.torus(2))


@pytest.fixture
def atomic1() -> BaseMeasure:
    return BaseMeasure.atomic(Domain.torus(1), [[0.1], [0.45], [0.8]], [0.5, 0.3, 0.2])


@pytest.fixture
def zero1() -> Potential:
    return Potential.zero(Domain.torus(1))


@pytest.fixture
def stream() -> RandomStream:
    return RandomStream(seed=20240601)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def kernel_calculator() -> KernelCalculator:
    return KernelCalculator()


@pytest.fixture
def energy_calculator(kernel_calculator) -> EnergyCalculator:
    return EnergyCalculator(kernel_calculator)


@pytest.fixture
def sampler() -> MeasureSampler:
    return MeasureSampler()
