"""
Total derivatives on the jet space
D_v = d/dv + sum over jets of u_{J+v} d/du_J + sum over defined atoms of rule_v d/da
"""

import logging
from typing import Dict, Optional

import sympy

from ..errors import ContextError, MissingDerivativeRuleError
from ..expr_core import Context, MultiIndex, is_zero, normalize, substitute

logger = logging.getLogger(__name__)


class JetSpace:
    """
    Total differentiation and jet-level substitution for one context
    """

    def __init__(self, ctx: Context):
        """
        Initialize the jet space

        Args:
            ctx: Declaration context
        """
        self.ctx = ctx

    def total_derivative(self, expr: sympy.Expr, var: str, normalized: bool = True) -> sympy.Expr:
        """
        Total derivative D_var(expr)

        Function applications follow the chain rule through their arguments,
        with the derivative order of the symbol raised per argument.

        Args:
            expr: Expression on the jet space
            var: Independent-variable name
            normalized: Return the canonical form

        Returns:
            D_var(expr)

        Raises:
            MissingDerivativeRuleError: If expr contains a defined atom without a rule for var
        """
        i = self.ctx.indep_index(var)
        result = sympy.diff(expr, sympy.Symbol(var))
        for sym in expr.free_symbols:
            info = self.ctx.jet_info(sym)
            if info is not None:
                dep, index = info
                result += sympy.diff(expr, sym) * self.ctx.jet(dep, index.shifted(i))
                continue
            atom = self.ctx.atom_for(sym)
            if atom is not None:
                if var not in atom.rules:
                    raise MissingDerivativeRuleError(
                        f"Defined atom {atom.name} has no derivative rule D[{var}]")
                result += sympy.diff(expr, sym) * atom.rules[var]
        return normalize(result, self.ctx) if normalized else result

    def total_derivative_multi(self, expr: sympy.Expr, index: MultiIndex,
                               normalized: bool = True) -> sympy.Expr:
        """D_J(expr) for a multi-index J, applied one variable at a time"""
        result = expr
        for i in index.steps():
            result = self.total_derivative(result, self.ctx.indep_vars[i], normalized)
        return result

    def solution_bindings(self, expr: sympy.Expr, dep: str, solution: sympy.Expr,
                          cache: Optional[Dict[MultiIndex, sympy.Expr]] = None) -> Dict[sympy.Symbol, sympy.Expr]:
        """
        Jet image u_J -> D_J(solution) for every jet of dep occurring in expr

        Args:
            expr: Expression whose jets need images
            dep: Dependent variable being replaced
            solution: Expression standing in for dep
            cache: Optional D_J(solution) cache shared between calls

        Returns:
            Bindings for substitute()
        """
        cache = {} if cache is None else cache
        zero = MultiIndex.zero(self.ctx.n)
        cache.setdefault(zero, solution)
        bindings = {}
        for jet in self.ctx.jets_in(expr, dep):
            _, index = self.ctx.jet_info(jet)
            bindings[jet] = self._derivative_cached(index, cache)
        return bindings

    def _derivative_cached(self, index: MultiIndex, cache: Dict[MultiIndex, sympy.Expr]) -> sympy.Expr:
        if index in cache:
            return cache[index]
        i = next(k for k, c in enumerate(index.counts) if c > 0)
        previous = self._derivative_cached(index.shifted(i, -1), cache)
        value = self.total_derivative(previous, self.ctx.indep_vars[i])
        cache[index] = value
        return value

    def evaluate_on(self, expr: sympy.Expr, dep: str, solution: sympy.Expr,
                    normalized: bool = True) -> sympy.Expr:
        """
        Substitute u_J -> D_J(solution) for the jets of one dependent variable

        Args:
            expr: Differential expression
            dep: Dependent variable
            solution: Candidate expression for dep
            normalized: Normalize the result

        Returns:
            expr evaluated on the candidate
        """
        bindings = self.solution_bindings(expr, dep, solution)
        if normalized:
            return substitute(expr, bindings, self.ctx)
        return expr.xreplace(bindings)

    def check_atom_consistency(self):
        """
        Verify that every declared derivative rule preserves its atom's relation

        Raises:
            ContextError: If D_v(relation) does not reduce to zero
        """
        for atom in self.ctx.atoms.values():
            if atom.relation is None:
                continue
            for var in atom.rules:
                derived = self.total_derivative(atom.relation, var)
                if not is_zero(derived, self.ctx):
                    raise ContextError(
                        f"Rule D[{var}]({atom.name}) is inconsistent with its relation: "
                        f"D[{var}] of the relation leaves {derived}")
            logger.debug(f"Atom {atom.name}: rules consistent with relation")
