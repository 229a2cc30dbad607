"""
Solved-form constraints and reduction modulo their prolongations
"""

import logging
from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterable, List, Optional, Tuple, Union

import sympy

from ..errors import InconsistentConstraintError, RankingError
from ..expr_core import Context, MultiIndex, SymbolFunction, function_class, normalize
from .jet_space import JetSpace

logger = logging.getLogger(__name__)

Leader = Union[sympy.Symbol, SymbolFunction]


@dataclass(frozen=True)
class Constraint:
    """
    Solved-form relation ``leading = rhs``

    The leader is a jet variable u_J, or an application of a function symbol
    to distinct independent variables (a rewrite such as f_t = ...).
    """

    leading: sympy.Expr
    rhs: sympy.Expr
    name: Optional[str] = None

    @property
    def delta(self) -> sympy.Expr:
        """The differential expression leading - rhs"""
        return self.leading - self.rhs


class ConstraintSet:
    """
    A set of solved-form constraints with memoized normal forms of dominated jets

    Every jet u_{J0+K} with u_{J0} a leader is reduced by applying D_K to the
    right-hand side, peeling one variable at a time.
    """

    def __init__(self, ctx: Context, constraints: Iterable[Constraint], order_cap: int = 12):
        """
        Initialize and validate the constraint set

        Args:
            ctx: Declaration context
            constraints: Solved-form constraints
            order_cap: Highest jet order reachable before reduction is abandoned

        Raises:
            RankingError: If a constraint is not in solved form
        """
        self.ctx = ctx
        self.jets = JetSpace(ctx)
        self.constraints: List[Constraint] = list(constraints)
        self.order_cap = order_cap
        self._memo: Dict[sympy.Expr, sympy.Expr] = {}
        for c in self.constraints:
            self._validate(c)

    def __len__(self) -> int:
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    # ------------------------------------------------------------------
    # Leaders
    # ------------------------------------------------------------------

    def _function_leader_vars(self, app: SymbolFunction) -> Optional[List[int]]:
        indices = []
        for arg in app.args:
            if not isinstance(arg, sympy.Symbol) or self.ctx.category(arg.name) != 'indep':
                return None
            indices.append(self.ctx.indep_index(arg.name))
        if len(set(indices)) != len(indices):
            return None
        return indices

    def _validate(self, c: Constraint):
        lead = c.leading
        info = self.ctx.jet_info(lead)
        if info is not None:
            dep, index = info
            for jet in self.ctx.jets_in(c.rhs, dep):
                _, other = self.ctx.jet_info(jet)
                if other.rank_key() >= index.rank_key():
                    raise RankingError(
                        f"Constraint {lead} = ... is not in solved form: "
                        f"right-hand side contains {jet} of rank >= the leader")
            return
        if isinstance(lead, SymbolFunction) and self._function_leader_vars(lead) is not None:
            for app in c.rhs.atoms(SymbolFunction):
                if self._shift(lead, app) is not None:
                    raise RankingError(
                        f"Rewrite {lead} = ... is not in solved form: "
                        f"right-hand side contains derivative {app} of the leader")
            return
        raise RankingError(f"Constraint leader {lead} is neither a jet variable nor a function derivative")

    def _shift(self, lead: sympy.Expr, obj: sympy.Expr) -> Optional[MultiIndex]:
        """Multi-index K with obj = D_K(lead), or None"""
        lead_info = self.ctx.jet_info(lead)
        if lead_info is not None:
            info = self.ctx.jet_info(obj)
            if info is None or info[0] != lead_info[0] or not info[1].dominates(lead_info[1]):
                return None
            return info[1] - lead_info[1]
        if not isinstance(obj, SymbolFunction) or obj.symbol_name != lead.symbol_name:
            return None
        if obj.args != lead.args:
            return None
        positions = self._function_leader_vars(lead)
        counts = [0] * self.ctx.n
        for k, pos in enumerate(positions):
            diff = obj.orders[k] - lead.orders[k]
            if diff < 0:
                return None
            counts[pos] = diff
        return MultiIndex(tuple(counts))

    def leader_for(self, obj: sympy.Expr) -> Optional[Tuple[Constraint, MultiIndex]]:
        """First constraint whose leader obj is a derivative of"""
        for c in self.constraints:
            shift = self._shift(c.leading, obj)
            if shift is not None:
                return c, shift
        return None

    def _peel(self, obj: sympy.Expr, var_index: int) -> sympy.Expr:
        """The object one derivative in var_index lower than obj"""
        info = self.ctx.jet_info(obj)
        if info is not None:
            return self.ctx.jet(info[0], info[1].shifted(var_index, -1))
        var = sympy.Symbol(self.ctx.indep_vars[var_index])
        orders = list(obj.orders)
        orders[obj.args.index(var)] -= 1
        return function_class(obj.symbol_name, tuple(orders))(*obj.args)

    def _order(self, obj: sympy.Expr) -> int:
        info = self.ctx.jet_info(obj)
        if info is not None:
            return info[1].order
        return sum(obj.orders)

    # ------------------------------------------------------------------
    # Reduction
    # ------------------------------------------------------------------

    def reduced_jet(self, obj: sympy.Expr) -> sympy.Expr:
        """
        Normal form of a jet variable (or function derivative) modulo the set

        Args:
            obj: Jet Symbol or function application

        Returns:
            Fully reduced replacement, or obj itself when no leader dominates it

        Raises:
            RankingError: If the order cap is exceeded
        """
        if obj in self._memo:
            return self._memo[obj]
        found = self.leader_for(obj)
        if found is None:
            return obj
        if self._order(obj) > self.order_cap:
            raise RankingError(f"Reduction of {obj} exceeds the order cap {self.order_cap}")

        constraint, shift = found
        if shift.order == 0:
            value = self.reduce(constraint.rhs)
        else:
            i = next(k for k, c in enumerate(shift.counts) if c > 0)
            previous = self.reduced_jet(self._peel(obj, i))
            value = self.reduce(self.jets.total_derivative(previous, self.ctx.indep_vars[i]))
        self._memo[obj] = value
        return value

    def _reducible(self, expr: sympy.Expr) -> List[sympy.Expr]:
        objs = [s for s in expr.free_symbols if self.ctx.jet_info(s) is not None]
        objs += list(expr.atoms(SymbolFunction))
        return [o for o in objs if self.leader_for(o) is not None]

    def reduce(self, expr: sympy.Expr) -> sympy.Expr:
        """
        Replace every dominated jet by its normal form until none remain

        Args:
            expr: Expression on the jet space

        Returns:
            Normalized expression free of reducible jets
        """
        for _ in range(self.order_cap + 1):
            targets = self._reducible(expr)
            if not targets:
                return normalize(expr, self.ctx)
            expr = expr.xreplace({t: self.reduced_jet(t) for t in targets})
        raise RankingError(f"Reduction did not terminate within {self.order_cap} passes")

    # ------------------------------------------------------------------
    # Prolongation
    # ------------------------------------------------------------------

    def _candidates(self, obj: sympy.Expr) -> List[sympy.Expr]:
        """Every one-step derivation of obj's normal form from any dominating leader"""
        values = []
        for c in self.constraints:
            shift = self._shift(c.leading, obj)
            if shift is None:
                continue
            if shift.order == 0:
                values.append(self.reduce(c.rhs))
                continue
            for i, count in enumerate(shift.counts):
                if count == 0:
                    continue
                previous = self.reduced_jet(self._peel(obj, i))
                values.append(self.reduce(
                    self.jets.total_derivative(previous, self.ctx.indep_vars[i])))
        return values

    def prolong(self, bound: MultiIndex) -> List[Constraint]:
        """
        Prolong the jet constraints to every multi-index up to a bound

        All derivation paths reaching the same jet are compared.

        Args:
            bound: Componentwise upper bound on the multi-indices generated

        Returns:
            Constraints u_J = rhs for every dominated J <= bound, ranked

        Raises:
            InconsistentConstraintError: If two paths disagree
        """
        result = {}
        for c in self.constraints:
            info = self.ctx.jet_info(c.leading)
            if info is None or not bound.dominates(info[1]):
                continue
            dep, lead_index = info
            ranges = [range(lead_index.counts[k], bound.counts[k] + 1) for k in range(self.ctx.n)]
            for counts in product(*ranges):
                jet = self.ctx.jet(dep, MultiIndex(tuple(counts)))
                if jet in result:
                    continue
                values = self._candidates(jet)
                first = values[0]
                for other in values[1:]:
                    if normalize(first - other, self.ctx) != 0:
                        raise InconsistentConstraintError(
                            f"Prolongation reaches {jet} with different values: {first} and {other}")
                result[jet] = Constraint(jet, first)
        ranked = sorted(result.values(), key=lambda c: self.ctx.atom_sort_key(c.leading))
        logger.debug(f"Prolonged {len(self.constraints)} constraint(s) to {len(ranked)}")
        return ranked
