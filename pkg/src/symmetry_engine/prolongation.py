"""
Prolongation of evolutionary fields, invariance defects, Frechet linearization,
solution mapping and commutators
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Union

import sympy

from ..expr_core import (
    Context,
    MonomialFactorization,
    MultiIndex,
    factor_monomial,
    normalize,
    substitute,
)
from ..jet_calculus import Constraint, ConstraintSet, JetSpace
from .fields import EvolutionaryField, PointField, as_evolutionary

logger = logging.getLogger(__name__)

MAX_CACHED_FIELDS = 32


@dataclass
class DefectReport:
    """Outcome of an invariance check"""

    defect: sympy.Expr
    is_invariant: bool
    factorization: MonomialFactorization
    field_name: Optional[str] = None

    def constant_multiple(self, factor: sympy.Expr, ctx: Context) -> Optional[sympy.Rational]:
        """The nonzero rational c0 with defect = c0*factor, or None when there is none"""
        quotient = normalize(self.defect / factor, ctx)
        if quotient.is_Rational and quotient != 0:
            return quotient
        return None

    def divisible_by(self, factor: sympy.Expr, ctx: Context) -> bool:
        return self.constant_multiple(factor, ctx) is not None


class SymmetryEngine:
    """
    Symbolic engine for generalized symmetries of one context
    """

    def __init__(self, ctx: Context, order_cap: int = 12):
        """
        Initialize the engine

        Args:
            ctx: Declaration context
            order_cap: Order cap handed to constraint reduction
        """
        self.ctx = ctx
        self.order_cap = order_cap
        self.jets = JetSpace(ctx)
        self._derivative_caches: 'OrderedDict[tuple, Dict[MultiIndex, sympy.Expr]]' = OrderedDict()

    def _cache_for(self, field: EvolutionaryField) -> Dict[MultiIndex, sympy.Expr]:
        # least recently used field is evicted first
        key = (field.dep, field.characteristic)
        if key in self._derivative_caches:
            self._derivative_caches.move_to_end(key)
            return self._derivative_caches[key]
        cache: Dict[MultiIndex, sympy.Expr] = {}
        self._derivative_caches[key] = cache
        if len(self._derivative_caches) > MAX_CACHED_FIELDS:
            self._derivative_caches.popitem(last=False)
        return cache

    def prolong_apply(self, field: Union[EvolutionaryField, PointField], expr: sympy.Expr) -> sympy.Expr:
        """
        Apply the infinite prolongation pr Q = sum_J D_J(eta) d/du_J to expr

        Args:
            field: Evolutionary field (point fields are converted)
            expr: Expression on the jet space

        Returns:
            Normalized pr Q(expr)
        """
        field = as_evolutionary(field, self.ctx)
        bindings = self.jets.solution_bindings(expr, field.dep, field.characteristic,
                                               self._cache_for(field))
        total = sympy.Integer(0)
        for jet, derivative in bindings.items():
            total += derivative * sympy.diff(expr, jet)
        return normalize(total, self.ctx)

    def constraint_set(self, constraints: Iterable[Constraint]) -> ConstraintSet:
        return ConstraintSet(self.ctx, constraints, self.order_cap)

    def invariance_defect(self, target: Union[Constraint, sympy.Expr],
                          field: Union[EvolutionaryField, PointField],
                          constraints: Optional[Sequence[Constraint]] = None) -> DefectReport:
        """
        Apply pr Q to a constraint and reduce modulo the constraint set

        Args:
            target: Constraint (its own solved form is used for reduction) or a bare expression
            field: Symmetry candidate
            constraints: Reduction set overriding the default, e.g. with extra rewrites

        Returns:
            DefectReport with the reduced defect and its monomial factorization
        """
        field = as_evolutionary(field, self.ctx)
        if isinstance(target, Constraint):
            delta = target.delta
            reduction = list(constraints) if constraints is not None else [target]
        else:
            delta = target
            reduction = list(constraints or [])

        applied = self.prolong_apply(field, delta)
        defect = self.constraint_set(reduction).reduce(applied) if reduction else applied
        report = DefectReport(defect, defect == 0, factor_monomial(defect, self.ctx), field.name)
        if report.is_invariant:
            logger.debug(f"{field.name or 'field'} leaves the constraint invariant")
        else:
            logger.debug(f"{field.name or 'field'} defect: {defect}")
        return report

    def frechet(self, delta: sympy.Expr, aux: Optional[str] = None, dep: Optional[str] = None) -> sympy.Expr:
        """
        Frechet linearization sum_J dDelta/du_J * w_J

        Args:
            delta: Differential expression
            aux: Auxiliary variable name (defaults to the context's first)
            dep: Dependent variable linearized (defaults to the primary one)

        Returns:
            Normalized linearization, linear and homogeneous in the w-jets
        """
        aux = aux or self.ctx.aux_vars[0]
        dep = dep or self.ctx.primary_dep
        total = sympy.Integer(0)
        for jet in self.ctx.jets_in(delta, dep):
            _, index = self.ctx.jet_info(jet)
            total += sympy.diff(delta, jet) * self.ctx.jet(aux, index)
        return normalize(total, self.ctx)

    def linearization_residual(self, delta: sympy.Expr, seed: sympy.Expr, w: sympy.Expr,
                               aux: Optional[str] = None) -> sympy.Expr:
        """Evaluate the linearization at u = seed with w replaced by a candidate"""
        aux = aux or self.ctx.aux_vars[0]
        dep = self.ctx.primary_dep
        linear = self.frechet(delta, aux, dep)
        bindings = self.jets.solution_bindings(linear, aux, w)
        bindings.update(self.jets.solution_bindings(linear, dep, seed))
        return substitute(linear, bindings, self.ctx)

    def map_solution(self, field: Union[EvolutionaryField, PointField],
                     seed: Union[sympy.Expr, Dict[sympy.Symbol, sympy.Expr]]) -> sympy.Expr:
        """
        Evaluate the characteristic at a solution

        Args:
            field: Symmetry
            seed: Solution expression, or explicit jet bindings u_J -> value

        Returns:
            eta with every jet bound, normalized

        Raises:
            MissingBindingError: If explicit bindings miss a jet of eta
        """
        field = as_evolutionary(field, self.ctx)
        eta = field.characteristic
        if isinstance(seed, dict):
            bindings = seed
        else:
            bindings = self.jets.solution_bindings(eta, field.dep, seed)
        return substitute(eta, bindings, self.ctx, total=True)

    def commutator(self, first: Union[EvolutionaryField, PointField],
                   second: Union[EvolutionaryField, PointField],
                   name: Optional[str] = None) -> EvolutionaryField:
        """
        Lie bracket of evolutionary fields: pr Q1(eta2) - pr Q2(eta1)

        Args:
            first: Q1
            second: Q2
            name: Name for the bracket

        Returns:
            EvolutionaryField of the bracket
        """
        first = as_evolutionary(first, self.ctx)
        second = as_evolutionary(second, self.ctx)
        characteristic = normalize(
            self.prolong_apply(first, second.characteristic)
            - self.prolong_apply(second, first.characteristic), self.ctx)
        return EvolutionaryField(characteristic, first.dep, name)
