"""
Калькуляторы лаборатории лог-газа: ядро, энергия, статсуммы, моменты, динамика, мера Гиббса
"""

from .kernel_calculator import KernelCalculator, SpectralTable, spectral_table, structure_factor, synthesize
from .regularity_verifier import RegularityVerifier
from .measure_sampler import AliasTable, MeasureSampler
from .convolution import MeasureConvolver, fourier_coefficients
from .energy_calculator import EnergyCalculator
from .lower_bound_probe import LowerBoundProbe
from .partition_estimator import PartitionEstimator
from .correlation_moments import CorrelationMoments
from .sde_integrator import SdeIntegrator, noise_generators
from .mckean_vlasov_solver import McKeanVlasovSolver, kernel_symbol
from .modulated_energy import ModulatedEnergyTracker
from .mean_field_solver import MeanFieldSolver
from .gibbs_sampler import GibbsSampler, GibbsTarget
from .entropy_rates import EntropyRateEstimator

__all__ = [
    'KernelCalculator',
    'SpectralTable',
    'spectral_table',
    'structure_factor',
    'synthesize',
    'RegularityVerifier',
    'AliasTable',
    'MeasureSampler',
    'MeasureConvolver',
    'fourier_coefficients',
    'EnergyCalculator',
    'LowerBoundProbe',
    'PartitionEstimator',
    'CorrelationMoments',
    'SdeIntegrator',
    'noise_generators',
    'McKeanVlasovSolver',
    'kernel_symbol',
    'ModulatedEnergyTracker',
    'MeanFieldSolver',
    'GibbsSampler',
    'GibbsTarget',
    'EntropyRateEstimator',
]
