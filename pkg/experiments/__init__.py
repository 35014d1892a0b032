"""
Запуск экспериментов лаборатории
"""

from .worker_pool import WorkerPool
from .experiment_runner import ExperimentOutcome, ExperimentRunner

__all__ = [
    'WorkerPool',
    'ExperimentOutcome',
    'ExperimentRunner',
]
