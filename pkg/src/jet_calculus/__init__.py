"""
Jet calculus - total derivatives and solved-form constraints
"""

from ..expr_core.multi_index import MultiIndex
from .constraints import Constraint, ConstraintSet
from .jet_space import JetSpace

__all__ = ['MultiIndex', 'Constraint', 'ConstraintSet', 'JetSpace']
