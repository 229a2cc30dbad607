"""
Numeric verification - RK4 integration of reduced systems and residual checks
"""

from .instantiation import (
    FunctionInstantiation,
    NumericScenario,
    TimeGrid,
    compile_expression,
    explicit_atoms,
    instantiate,
    prepare,
)
from .integrator import ReducedSystemIntegrator, Trajectory, rk4
from .residual import FDCheck, ResidualChecker, ResidualReport, fd_check

__all__ = [
    'FunctionInstantiation', 'NumericScenario', 'TimeGrid',
    'compile_expression', 'explicit_atoms', 'instantiate', 'prepare',
    'ReducedSystemIntegrator', 'Trajectory', 'rk4',
    'FDCheck', 'ResidualChecker', 'ResidualReport', 'fd_check',
]
