"""
Модели данных лаборатории репульсивного лог-газа
"""

from .errors import (
    LogGasError, DomainError, ConfigurationError, UnsupportedConfigurationError,
    EstimationError, InvariantViolationError, IntegrationError, ConvergenceError, TuningError,
    ConfigParseError
)
from .verdict import Verdict
from .domain import Domain, DomainKind
from .kernel import Kernel, KernelFamily, SemigroupOrder
from .measure import BaseMeasure, MeasureKind
from .configuration import Configuration, EnergyBreakdown, FluctuationNormalization
from .stream import RandomStream
from .regularity import RegularityReport
from .partition import (
    PartitionEstimate, PartitionSweep, EnumeratedPartition, LayerCakeDiagnostic, LayerCakeRow
)
from .moments import (
    MultiIndex, MultiplicityProfile, ActivePairDecomposition, CenteredKernel, MomentReport
)
from .potential import Potential, PotentialKind
from .dynamics import SdeState, PdeState, MvTrajectory, ModulatedEnergyRow, SlopeFit
from .gibbs import MeanFieldMinimizer, ChainConfig, GibbsRun, EntropyRateRow
from .experiment import (
    ExperimentKind, ExperimentConfig, ExperimentRecord, GapEvaluation, KernelSpec, MeasureSpec,
    PotentialSpec, KernelVerifyParams, ZsweepParams, ProbeParams, MomentsParams, SdeRunParams,
    MvSolveParams, MflSweepParams, GibbsParams
)

__all__ = [
    'LogGasError', 'DomainError', 'ConfigurationError', 'UnsupportedConfigurationError',
    'EstimationError', 'InvariantViolationError', 'IntegrationError', 'ConvergenceError', 'TuningError', 'ConfigParseError',
    'Verdict',
    'Domain', 'DomainKind',
    'Kernel', 'KernelFamily', 'SemigroupOrder',
    'BaseMeasure', 'MeasureKind',
    'Configuration', 'EnergyBreakdown', 'FluctuationNormalization',
    'RandomStream',
    'RegularityReport',
    'PartitionEstimate', 'PartitionSweep', 'EnumeratedPartition', 'LayerCakeDiagnostic', 'LayerCakeRow',
    'MultiIndex', 'MultiplicityProfile', 'ActivePairDecomposition', 'CenteredKernel', 'MomentReport',
    'Potential', 'PotentialKind',
    'SdeState', 'PdeState', 'MvTrajectory', 'ModulatedEnergyRow', 'SlopeFit',
    'MeanFieldMinimizer', 'ChainConfig', 'GibbsRun', 'EntropyRateRow',
    'ExperimentKind', 'ExperimentConfig', 'ExperimentRecord', 'GapEvaluation', 'KernelSpec',
    'MeasureSpec', 'PotentialSpec', 'KernelVerifyParams', 'ZsweepParams', 'ProbeParams',
    'MomentsParams', 'SdeRunParams', 'MvSolveParams', 'MflSweepParams', 'GibbsParams',
]
