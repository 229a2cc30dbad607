"""
Numeric scenario data and symbolic-to-numpy preparation
Function symbols are bound to concrete expressions, parameters to exact values,
and defined atoms to their explicit roots before lambdify
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from ..errors import NumericDomainError
from ..expr_core import Context, SymbolFunction

logger = logging.getLogger(__name__)


@dataclass
class FunctionInstantiation:
    """Concrete body for a function symbol, e.g. h(z) = z^2"""

    name: str
    variables: Tuple[sympy.Symbol, ...]
    body: sympy.Expr

    def derivative(self, orders: Sequence[int]) -> sympy.Expr:
        result = self.body
        for var, order in zip(self.variables, orders):
            if order:
                result = sympy.diff(result, var, order)
        return result

    def apply(self, app: SymbolFunction) -> sympy.Expr:
        """Body (differentiated per the application's orders) at the application's arguments"""
        if len(app.args) != len(self.variables):
            raise NumericDomainError(
                f"{self.name} instantiated with {len(self.variables)} variable(s), applied to {len(app.args)}")
        return self.derivative(app.orders).xreplace(dict(zip(self.variables, app.args)))


@dataclass
class TimeGrid:
    """Fixed-step grid start, start + step, ..., stop"""

    var: str
    start: float
    stop: float
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError(f"Grid step must be positive, got {self.step}")
        if self.stop <= self.start:
            raise ValueError(f"Grid end {self.stop} must exceed its start {self.start}")

    def steps(self, step: Optional[float] = None) -> int:
        step = step or self.step
        n = int(round((self.stop - self.start) / step))
        if n < 1 or abs(n * step - (self.stop - self.start)) > 1e-9 * max(1.0, abs(self.stop)):
            raise ValueError(f"Step {step} does not divide [{self.start}, {self.stop}]")
        return n


@dataclass
class NumericScenario:
    """
    Everything needed to evaluate a reduced system or a candidate numerically
    """

    name: str
    values: Dict[sympy.Symbol, sympy.Expr] = field(default_factory=dict)
    instantiations: Dict[str, FunctionInstantiation] = field(default_factory=dict)
    initial: Dict[str, sympy.Expr] = field(default_factory=dict)
    grid: Optional[TimeGrid] = None
    samples: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    count: int = 50
    guards: List[sympy.Expr] = field(default_factory=list)
    closed: Dict[str, sympy.Expr] = field(default_factory=dict)


def instantiate(expr: sympy.Expr, instantiations: Dict[str, FunctionInstantiation],
                max_depth: int = 16) -> sympy.Expr:
    """Replace instantiated function applications (outermost first) until none remain"""
    for _ in range(max_depth):
        apps = [a for a in expr.atoms(SymbolFunction) if a.symbol_name in instantiations]
        if not apps:
            return expr
        expr = expr.xreplace({a: instantiations[a.symbol_name].apply(a) for a in apps})
    raise NumericDomainError(f"Function instantiation did not terminate for {expr}")


def explicit_atoms(expr: sympy.Expr, ctx: Context) -> sympy.Expr:
    """
    Replace defined atoms with binomial relations a^k - P by the principal root P^(1/k)

    Raises:
        NumericDomainError: If an atom in expr has no explicit root
    """
    for _ in range(len(ctx.atoms) + 1):
        present = [a for a in ctx.atoms.values() if expr.has(a.symbol)]
        if not present:
            return expr
        replacements = {}
        for atom in present:
            if atom.relation is None:
                raise NumericDomainError(f"Atom {atom.name} has no relation to evaluate it with")
            poly = sympy.Poly(atom.relation, atom.symbol)
            k = poly.degree()
            lower = sympy.expand(atom.symbol ** k - atom.relation)
            if lower.has(atom.symbol):
                raise NumericDomainError(f"Relation of atom {atom.name} is not binomial")
            replacements[atom.symbol] = lower ** sympy.Rational(1, k)
        expr = expr.xreplace(replacements)
    raise NumericDomainError("Defined atoms refer to each other cyclically")


def prepare(expr: sympy.Expr, ns: NumericScenario, ctx: Context) -> sympy.Expr:
    """Instantiate functions, bind parameter values and resolve atoms"""
    expr = instantiate(sympy.sympify(expr), ns.instantiations)
    expr = explicit_atoms(expr, ctx)
    expr = instantiate(expr, ns.instantiations)
    return expr.xreplace(ns.values)


def compile_expression(expr: sympy.Expr, args: Sequence[sympy.Expr]) -> Callable:
    """
    numpy callable for expr over args (symbols or function applications)

    Raises:
        NumericDomainError: If expr depends on something outside args
    """
    masked = expr.xreplace({a: sympy.Dummy() for a in args if not isinstance(a, sympy.Symbol)})
    leftover = {s for s in masked.free_symbols if not isinstance(s, sympy.Dummy)}
    leftover -= {a for a in args if isinstance(a, sympy.Symbol)}
    apps = masked.atoms(SymbolFunction)
    if leftover or apps:
        missing = sorted(str(s) for s in leftover | apps)
        raise NumericDomainError(f"No numeric value for {', '.join(missing)} in {expr}")
    return sympy.lambdify(list(args), expr, modules='numpy', dummify=True)


def evaluate(fn: Callable, args: Sequence, size: Optional[int] = None) -> np.ndarray:
    """Call a compiled expression and broadcast constants to the sample size"""
    with np.errstate(all='ignore'):
        value = np.asarray(fn(*args), dtype=float)
    if size is not None:
        value = np.broadcast_to(value, (size,)).copy()
    return value
