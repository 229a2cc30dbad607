"""
Reduction - ansatz substitution and reduced-system collection
"""

from .ansatz import Ansatz
from .reducer import AnsatzReducer, ReducedSystem, canonical_equation, proportional

__all__ = ['Ansatz', 'AnsatzReducer', 'ReducedSystem', 'canonical_equation', 'proportional']
