"""
Function-symbol applications
Every (name, derivative orders) pair maps to one cached sympy Function class, so
sympy's chain rule raises the derivative order through fdiff
"""

from typing import Dict, Tuple

import sympy
from sympy.core.function import ArgumentIndexError

_FUNCTION_CLASSES: Dict[Tuple[str, Tuple[int, ...]], type] = {}


class SymbolFunction(sympy.Function):
    """
    Application of a declared smooth function symbol, possibly differentiated

    ``d(h,1)(z)`` is the class for name ``h`` with orders ``(1,)``
    """

    symbol_name: str = ''
    orders: Tuple[int, ...] = ()
    _diff_wrt = True

    def fdiff(self, argindex=1):
        if not 1 <= argindex <= len(self.args):
            raise ArgumentIndexError(self, argindex)
        orders = list(self.orders)
        orders[argindex - 1] += 1
        return function_class(self.symbol_name, tuple(orders))(*self.args)


def function_label(name: str, orders: Tuple[int, ...]) -> str:
    """DSL spelling of a (possibly differentiated) function symbol"""
    if not any(orders):
        return name
    return f"d({name},{','.join(str(o) for o in orders)})"


def function_class(name: str, orders: Tuple[int, ...]) -> type:
    """
    Get the Function class for a symbol name and per-argument derivative orders

    Args:
        name: Declared function-symbol name
        orders: Derivative order per argument

    Returns:
        Cached SymbolFunction subclass
    """
    key = (name, tuple(int(o) for o in orders))
    cls = _FUNCTION_CLASSES.get(key)
    if cls is None:
        if any(o < 0 for o in key[1]):
            raise ValueError(f"Negative derivative order for {name}: {key[1]}")
        cls = type(function_label(name, key[1]), (SymbolFunction,), {
            'symbol_name': name,
            'orders': key[1],
            'nargs': len(key[1]),
        })
        _FUNCTION_CLASSES[key] = cls
    return cls


def apply_function(name: str, orders: Tuple[int, ...], args) -> sympy.Expr:
    """Build the application d(name, orders)(args)"""
    return function_class(name, tuple(orders))(*args)


def function_applications(expr: sympy.Expr):
    """All SymbolFunction applications inside an expression"""
    return expr.atoms(SymbolFunction)
