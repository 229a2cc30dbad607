"""
Expression core - declarations, parsing, canonical form and printing
"""

from .context import Context, DefinedAtom, FunctionSymbol
from .functions import SymbolFunction, apply_function, function_applications, function_class
from .multi_index import MultiIndex
from .normal_form import (
    MonomialFactorization,
    diff_atom,
    factor_monomial,
    generators,
    is_zero,
    normalize,
    substitute,
)
from .parser import ExpressionParser, infer_context, parse, scan_names
from .printer import DSLPrinter, to_dsl

__all__ = [
    'Context', 'DefinedAtom', 'FunctionSymbol',
    'SymbolFunction', 'apply_function', 'function_applications', 'function_class',
    'MultiIndex',
    'MonomialFactorization', 'diff_atom', 'factor_monomial', 'generators',
    'is_zero', 'normalize', 'substitute',
    'ExpressionParser', 'infer_context', 'parse', 'scan_names',
    'DSLPrinter', 'to_dsl',
]
