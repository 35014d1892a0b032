"""
Данные для графиков (без графической библиотеки)
"""

from .plot_data import PlotDataBuilder

__all__ = [
    'PlotDataBuilder'
]
