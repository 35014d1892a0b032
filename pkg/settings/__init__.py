"""
Загрузка конфигурации экспериментов
"""

from .config_loader import ConfigLoader, WORKERS_ENV

__all__ = [
    'ConfigLoader',
    'WORKERS_ENV'
]
