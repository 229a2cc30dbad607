"""
symred - symmetry reduction toolkit
Main package initialization
"""

__version__ = "1.0.0"

from .symred_runner import SymredRunner

__all__ = ['SymredRunner', '__version__']
