"""
Командная строка loggas
"""

from .main import build_parser, exit_code, main

__all__ = [
    'build_parser',
    'exit_code',
    'main'
]
