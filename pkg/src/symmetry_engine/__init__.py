"""
Symmetry engine - prolonged action, invariance defects, linearization and
determining equations
"""

from .determining import DeterminingSolution, DeterminingSolver
from .fields import EvolutionaryField, PointField, as_evolutionary
from .prolongation import DefectReport, SymmetryEngine
from .classical_invariance import (
    CLASSICAL_INVARIANT,
    INCONCLUSIVE,
    SystemInvarianceChecker,
    VerdictInput,
    algebra_dimension,
    classical_invariance_verdict,
)

__all__ = [
    'DeterminingSolution', 'DeterminingSolver',
    'EvolutionaryField', 'PointField', 'as_evolutionary',
    'DefectReport', 'SymmetryEngine',
    'CLASSICAL_INVARIANT', 'INCONCLUSIVE', 'SystemInvarianceChecker',
    'VerdictInput', 'algebra_dimension', 'classical_invariance_verdict',
]
