"""
Canonical rational normal form
Numerator/denominator cancellation over polynomial generators, reduction modulo
defined-atom relations and exponential merging
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import sympy
from sympy.polys.polyerrors import BasePolynomialError

from ..errors import MissingBindingError, ZeroDenominatorError
from .functions import SymbolFunction

logger = logging.getLogger(__name__)


def _check_finite(expr: sympy.Expr):
    if expr.has(sympy.zoo, sympy.nan, sympy.oo, -sympy.oo):
        raise ZeroDenominatorError(f"Division by zero while normalizing {expr}")


def _ln_exp_rule(ctx) -> bool:
    return True if ctx is None else ctx.ln_exp_rule


def _normalize_arguments(expr: sympy.Expr, ctx) -> sympy.Expr:
    """Normalize the arguments of exp, ln and function applications bottom-up"""
    if expr.is_Atom:
        return expr
    if isinstance(expr, (sympy.exp, sympy.log, SymbolFunction)):
        args = [normalize(a, ctx) for a in expr.args]
        if isinstance(expr, sympy.log) and _ln_exp_rule(ctx) and isinstance(args[0], sympy.exp):
            return args[0].args[0]
        return expr.func(*args)
    if isinstance(expr, (sympy.Add, sympy.Mul, sympy.Pow)):
        return expr.func(*[_normalize_arguments(a, ctx) for a in expr.args])
    return expr


def _split_exponentials(expr: sympy.Expr) -> sympy.Expr:
    """exp(a + b) -> exp(a)*exp(b) outside function arguments"""
    if isinstance(expr, sympy.exp):
        arg = expr.args[0]
        if arg.is_Add:
            return sympy.Mul(*[sympy.exp(term) for term in arg.args])
        return expr
    if isinstance(expr, (sympy.Add, sympy.Mul, sympy.Pow)):
        return expr.func(*[_split_exponentials(a) for a in expr.args])
    return expr


def _merge_exponentials(expr: sympy.Expr) -> sympy.Expr:
    """exp(a)*exp(b) -> exp(a + b) within every product"""
    if expr.is_Add:
        return sympy.Add(*[_merge_exponentials(t) for t in expr.args])
    if expr.is_Mul:
        exponents = []
        others = []
        for factor in expr.args:
            if isinstance(factor, sympy.exp):
                exponents.append(factor.args[0])
            else:
                others.append(_merge_exponentials(factor))
        if len(exponents) > 1:
            others.append(sympy.exp(sympy.expand(sympy.Add(*exponents))))
        elif exponents:
            others.append(sympy.exp(exponents[0]))
        return sympy.Mul(*others)
    if expr.is_Pow:
        return sympy.Pow(_merge_exponentials(expr.base), expr.exp)
    return expr


def _cancel(expr: sympy.Expr) -> sympy.Expr:
    try:
        return sympy.cancel(expr)
    except BasePolynomialError as e:
        logger.debug(f"cancel failed ({e}); falling back to together")
        return sympy.together(expr)


def _rem(f: sympy.Expr, relation: sympy.Expr, atom: sympy.Symbol) -> sympy.Expr:
    return sympy.expand(sympy.rem(sympy.expand(f), relation, atom))


def _reduce_by_relations(num: sympy.Expr, den: sympy.Expr, ctx) -> Tuple[sympy.Expr, sympy.Expr]:
    """
    Reduce a fraction modulo every defined-atom relation

    Atom powers at or above the relation degree are rewritten in the numerator,
    and atoms are cleared from the denominator by multiplying with the inverse
    modulo the relation when it exists.
    """
    for atom in ctx.atoms.values():
        if atom.relation is None:
            continue
        a = atom.symbol

        if den.has(a) and den.is_polynomial(a):
            den = _rem(den, atom.relation, a)
            if den == 0:
                raise ZeroDenominatorError(
                    f"Denominator vanishes modulo the relation of {atom.name}")
            if den.has(a):
                try:
                    inverse = sympy.invert(den, atom.relation, a)
                except (BasePolynomialError, NotImplementedError) as e:
                    logger.debug(f"Denominator not invertible modulo {atom.name}: {e}")
                else:
                    num, den = sympy.fraction(_cancel(sympy.expand(num * inverse)))

        if num.has(a) and num.is_polynomial(a):
            num = _rem(num, atom.relation, a)

    return num, den


def normalize(expr, ctx=None) -> sympy.Expr:
    """
    Bring an expression to canonical form

    Two expressions equal as rational functions over the same atoms (and
    modulo defined-atom relations) normalize to the same result.

    Args:
        expr: Expression to normalize
        ctx: Context supplying atom relations and the ln(exp) flag

    Returns:
        Normalized expression

    Raises:
        ZeroDenominatorError: If a denominator is symbolically zero
    """
    expr = sympy.sympify(expr)
    if expr.atoms(sympy.Float):
        raise ValueError(f"Floating-point constants are not allowed in symbolic expressions: {expr}")
    _check_finite(expr)

    expr = _normalize_arguments(expr, ctx)
    expr = _cancel(_split_exponentials(expr))
    _check_finite(expr)

    num, den = sympy.fraction(expr)
    if ctx is not None and ctx.atoms:
        num, den = _reduce_by_relations(num, den, ctx)
        expr = _cancel(num / den)
        _check_finite(expr)
        num, den = sympy.fraction(expr)

    if den == 0:
        raise ZeroDenominatorError(f"Zero denominator in {expr}")
    return _merge_exponentials(num) / _merge_exponentials(den)


def is_zero(expr, ctx=None) -> bool:
    """True iff the expression normalizes to 0"""
    return normalize(expr, ctx) == 0


def diff_atom(expr: sympy.Expr, atom: sympy.Expr, ctx=None) -> sympy.Expr:
    """
    Partial derivative with respect to one atom

    Args:
        expr: Expression
        atom: Symbol, jet variable or function application

    Returns:
        Normalized partial derivative
    """
    return normalize(sympy.diff(expr, atom), ctx)


def substitute(expr: sympy.Expr, bindings: Dict[sympy.Expr, sympy.Expr], ctx=None,
               total: bool = False) -> sympy.Expr:
    """
    Simultaneously replace atoms by expressions and normalize

    Args:
        expr: Expression
        bindings: Atom -> replacement
        ctx: Context (required for total mode)
        total: Require every jet variable of expr to be bound

    Returns:
        Normalized result

    Raises:
        MissingBindingError: In total mode, when a jet variable is unbound
    """
    bindings = {sympy.sympify(k): sympy.sympify(v) for k, v in bindings.items()}
    if total:
        missing = [j for j in ctx.jets_in(expr) if j not in bindings]
        if missing:
            raise MissingBindingError(
                f"No binding for jet variable(s) {', '.join(str(j) for j in missing)}")
    return normalize(expr.xreplace(bindings), ctx)


def generators(expr: sympy.Expr, ctx=None) -> List[sympy.Expr]:
    """Polynomial generators of an expression in deterministic order"""
    try:
        gens = sympy.Poly(expr).gens
    except BasePolynomialError:
        return []
    if ctx is None:
        return sorted(gens, key=sympy.default_sort_key)
    return ctx.sort_atoms(gens)


@dataclass(frozen=True)
class MonomialFactorization:
    """expr == content * monomial * primitive / denominator"""

    content: sympy.Expr
    monomial: sympy.Expr
    primitive: sympy.Expr
    denominator: sympy.Expr

    def as_expr(self) -> sympy.Expr:
        return self.content * self.monomial * self.primitive / self.denominator


def factor_monomial(expr: sympy.Expr, ctx=None) -> MonomialFactorization:
    """
    Split a normalized expression into rational content, the largest monomial
    dividing every numerator term, and the remaining primitive part

    Args:
        expr: Normalized expression
        ctx: Context for generator ordering

    Returns:
        MonomialFactorization
    """
    num, den = sympy.fraction(expr)
    if num == 0:
        return MonomialFactorization(sympy.Integer(0), sympy.Integer(1), sympy.Integer(0), den)

    content, prim = sympy.expand(num).as_content_primitive()
    gens = generators(prim, ctx)
    if not gens:
        return MonomialFactorization(content * prim, sympy.Integer(1), sympy.Integer(1), den)

    poly = sympy.Poly(prim, *gens)
    monoms = poly.monoms()
    lowest = [min(m[i] for m in monoms) for i in range(len(gens))]
    monomial = sympy.Mul(*[g ** e for g, e in zip(gens, lowest)])
    primitive = sympy.expand(prim / monomial)
    return MonomialFactorization(content, monomial, primitive, den)
